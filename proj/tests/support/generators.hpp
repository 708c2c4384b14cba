#pragma once

// Hand-rolled generators for property tests. Every generator draws from a
// caller-owned engine so a failing case is reproducible from its seed.

#include <cstdint>
#include <random>
#include <vector>

#include "obsmix/combinatorics.hpp"
#include "obsmix/lattice.hpp"

namespace gen {

class Source {
  public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::mt19937_64 &engine() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

/// A label that fits `geom`, drawn by placing each of the four counts in turn.
inline obsmix::combinatorics::RickLabel rick_label(Source &s, const obsmix::combinatorics::BoxGeometry &g) {
    const int i = s.integer(0, g.left());
    const int red_left = s.integer(0, g.left() - i);
    const int blue_right = s.integer(0, g.right());
    const int red_right = s.integer(0, g.right() - blue_right);
    return {i, i + blue_right, i + red_left, i + red_left + blue_right + red_right};
}

/// Small lattice with at least one particle and at most `max_dim` basis states.
inline obsmix::lattice::LatticeSpec small_lattice(Source &s, std::size_t max_dim = 400) {
    for (;;) {
        obsmix::lattice::LatticeSpec spec;
        spec.L_A = s.integer(1, 4);
        spec.L_B = s.integer(1, 4);
        spec.N_plus = s.integer(0, 3);
        spec.N_minus = s.integer(0, 3);
        if (spec.particles() == 0 || spec.N_plus > spec.sites() || spec.N_minus > spec.sites()) continue;
        const auto size = obsmix::lattice::Basis::build(spec).size();
        if (size >= 2 && size <= max_dim) return spec;
    }
}

/// Strictly increasing levels with positive degeneracies.
inline std::pair<std::vector<double>, std::vector<long>> spectrum(Source &s, int max_levels = 8) {
    const int n = s.integer(2, max_levels);
    std::vector<double> levels;
    std::vector<long> deg;
    double e = s.real(-3.0, 0.0);
    for (int k = 0; k < n; ++k) {
        levels.push_back(e);
        deg.push_back(s.integer(1, 6));
        e += s.real(0.05, 2.0);
    }
    return {levels, deg};
}

} // namespace gen
