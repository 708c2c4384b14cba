#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "obsmix/combinatorics.hpp"

namespace obsmix::entropy {

using SectorKey = std::vector<int>;

/// Outcome distribution of a coarse-grained measurement; nonnegative, sums to one.
class ProbabilityVector {
  public:
    /// Throws DomainError on a negative entry or a total off by more than `tol`.
    explicit ProbabilityVector(std::vector<double> values, double tol = 1e-12);

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

  private:
    std::vector<double> values_;
};

/// One macrostate: its label, the basis indices it contains, and its dimension.
struct Sector {
    SectorKey key;
    std::vector<std::size_t> members;

    [[nodiscard]] std::size_t volume() const noexcept { return members.size(); }
};

/// Partition of a reference basis {0, ..., dim-1} into labeled, disjoint sectors.
class SectorPartition {
  public:
    /// Groups basis indices by key; sectors are ordered by key.
    static SectorPartition from_keys(std::span<const SectorKey> key_of_index);

    [[nodiscard]] const std::vector<Sector> &sectors() const noexcept { return sectors_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return sector_of_.size(); }
    [[nodiscard]] std::size_t sector_of(std::size_t basis_index) const { return sector_of_.at(basis_index); }
    /// Index of the sector with `key`, or sectors().size() if absent.
    [[nodiscard]] std::size_t find(const SectorKey &key) const;
    [[nodiscard]] std::vector<double> log_volumes() const;
    /// True when every sector of `this` lies inside a single sector of `coarser`.
    [[nodiscard]] bool refines(const SectorPartition &coarser) const;

  private:
    std::vector<Sector> sectors_;
    std::vector<std::size_t> sector_of_;
};

/// -sum p ln p with 0 ln 0 = 0. Negative entries throw DomainError.
double shannon(std::span<const double> p);

/// Binary Shannon entropy S(x) = -x ln x - (1-x) ln(1-x).
double binary_entropy(double x);

/// Shannon term plus mean log-volume: -sum p ln p + sum p ln V.
double observational_entropy(const ProbabilityVector &p, std::span<const double> log_volumes);
double observational_entropy(const ProbabilityVector &p, std::span<const combinatorics::ExactVolume> volumes);
double observational_entropy(const ProbabilityVector &p, const SectorPartition &partition);

/// p_j = sum of |amplitude|^2 over the members of sector j.
ProbabilityVector sector_probabilities(std::span<const std::complex<double>> state, const SectorPartition &partition);
/// Same for a state that is diagonal in the reference basis (weights per basis index).
ProbabilityVector sector_probabilities(std::span<const double> weights, const SectorPartition &partition);

enum class ObserverPair { rick_morty1, rick_morty2 };

/// Leading-order entropy gap between Rick and a Morty for a state inside one
/// Rick macrostate: N(S(a) + S(r) - S(q)) or N(S(a) + ln 2 - S(q)).
double entropy_diff_static(ObserverPair pair, const combinatorics::Fractions &f, int N);

/// Leading-order growth from a Rick macrostate to the uniformly spread state:
/// Rick N(ln 2 + S(r) - S(q)); every Morty N(ln 2 - S(a)).
double entropy_growth(combinatorics::Observer observer, const combinatorics::Fractions &f, int N);

/// Time-independent Morty offsets relative to Morty 3.
struct MortyOffsets {
    double morty1_minus_morty3; ///< N S(r)
    double morty2_minus_morty3; ///< N ln 2
};
MortyOffsets morty_offsets(const combinatorics::Fractions &f, int N);

} // namespace obsmix::entropy
