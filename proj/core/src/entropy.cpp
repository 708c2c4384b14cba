#include "obsmix/entropy.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace obsmix::entropy {

ProbabilityVector::ProbabilityVector(std::vector<double> values, double tol) : values_(std::move(values)) {
    double total = 0.0;
    for (double p : values_) {
        if (!(p >= 0.0)) throw DomainError("probability vector has a negative or NaN entry");
        total += p;
    }
    if (std::abs(total - 1.0) > tol)
        throw DomainError("probabilities sum to " + std::to_string(total) + ", not 1");
}

SectorPartition SectorPartition::from_keys(std::span<const SectorKey> key_of_index) {
    std::map<SectorKey, std::size_t> slot;
    for (const auto &key : key_of_index) slot.emplace(key, 0);
    SectorPartition out;
    out.sectors_.reserve(slot.size());
    for (auto &[key, index] : slot) {
        index = out.sectors_.size();
        out.sectors_.push_back({key, {}});
    }
    out.sector_of_.resize(key_of_index.size());
    for (std::size_t b = 0; b < key_of_index.size(); ++b) {
        const std::size_t s = slot.at(key_of_index[b]);
        out.sector_of_[b] = s;
        out.sectors_[s].members.push_back(b);
    }
    return out;
}

std::size_t SectorPartition::find(const SectorKey &key) const {
    for (std::size_t s = 0; s < sectors_.size(); ++s)
        if (sectors_[s].key == key) return s;
    return sectors_.size();
}

std::vector<double> SectorPartition::log_volumes() const {
    std::vector<double> out;
    out.reserve(sectors_.size());
    for (const auto &s : sectors_) out.push_back(std::log(static_cast<double>(s.volume())));
    return out;
}

bool SectorPartition::refines(const SectorPartition &coarser) const {
    if (coarser.dimension() != dimension()) return false;
    for (const auto &s : sectors_) {
        const std::size_t target = coarser.sector_of(s.members.front());
        for (std::size_t b : s.members)
            if (coarser.sector_of(b) != target) return false;
    }
    return true;
}

double shannon(std::span<const double> p) {
    double acc = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw DomainError("Shannon entropy of a negative or NaN probability");
        if (x > 0.0) acc -= x * std::log(x);
    }
    return acc;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw DomainError("binary entropy argument outside [0, 1]");
    const double pair[2] = {x, 1.0 - x};
    return shannon(pair);
}

double observational_entropy(const ProbabilityVector &p, std::span<const double> log_volumes) {
    if (p.size() != log_volumes.size()) throw DomainError("probabilities and volumes have different lengths");
    double mean_log_volume = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) mean_log_volume += p[i] * log_volumes[i];
    return shannon(p.values()) + mean_log_volume;
}

double observational_entropy(const ProbabilityVector &p, std::span<const combinatorics::ExactVolume> volumes) {
    std::vector<double> logs;
    logs.reserve(volumes.size());
    for (const auto &v : volumes) logs.push_back(combinatorics::log_exact(v));
    return observational_entropy(p, logs);
}

double observational_entropy(const ProbabilityVector &p, const SectorPartition &partition) {
    return observational_entropy(p, partition.log_volumes());
}

ProbabilityVector sector_probabilities(std::span<const std::complex<double>> state, const SectorPartition &partition) {
    if (state.size() != partition.dimension()) throw DomainError("state dimension does not match the partition");
    std::vector<double> p(partition.sectors().size(), 0.0);
    for (std::size_t b = 0; b < state.size(); ++b) p[partition.sector_of(b)] += std::norm(state[b]);
    // Normalization drift from time stepping is at the 1e-14 level; renormalize once.
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("state has zero norm");
    for (double &x : p) x /= total;
    return ProbabilityVector(std::move(p), 1e-9);
}

ProbabilityVector sector_probabilities(std::span<const double> weights, const SectorPartition &partition) {
    if (weights.size() != partition.dimension()) throw DomainError("weights dimension does not match the partition");
    std::vector<double> p(partition.sectors().size(), 0.0);
    for (std::size_t b = 0; b < weights.size(); ++b) {
        if (!(weights[b] >= 0.0)) throw DomainError("negative diagonal weight");
        p[partition.sector_of(b)] += weights[b];
    }
    return ProbabilityVector(std::move(p));
}

double entropy_diff_static(ObserverPair pair, const combinatorics::Fractions &f, int N) {
    f.validate();
    const auto q = f.q();
    const double cells = shannon(q);
    switch (pair) {
    case ObserverPair::rick_morty1: return N * (binary_entropy(f.a) + binary_entropy(f.r) - cells);
    case ObserverPair::rick_morty2: return N * (binary_entropy(f.a) + std::numbers::ln2 - cells);
    }
    return 0.0;
}

double entropy_growth(combinatorics::Observer observer, const combinatorics::Fractions &f, int N) {
    f.validate();
    if (observer == combinatorics::Observer::rick)
        return N * (std::numbers::ln2 + binary_entropy(f.r) - shannon(f.q()));
    return N * (std::numbers::ln2 - binary_entropy(f.a));
}

MortyOffsets morty_offsets(const combinatorics::Fractions &f, int N) {
    return {N * binary_entropy(f.r), N * std::numbers::ln2};
}

} // namespace obsmix::entropy
