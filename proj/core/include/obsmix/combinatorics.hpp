#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "obsmix/errors.hpp"

// Macrostate volumes of the two-species lattice gas.
//
// Counting convention: the two species are placed independently, so a site
// may host one particle of each color. Every volume below is a product of
// binomials C(side, count) or a sum of such products.

namespace obsmix::combinatorics {

using ExactVolume = boost::multiprecision::cpp_int;

/// Left box with L_A sites, right box with L_B sites.
class BoxGeometry {
  public:
    BoxGeometry(int L_A, int L_B);
    static BoxGeometry symmetric(int w) { return {w, w}; }

    [[nodiscard]] int left() const noexcept { return L_A_; }
    [[nodiscard]] int right() const noexcept { return L_B_; }
    [[nodiscard]] int total() const noexcept { return L_A_ + L_B_; }
    [[nodiscard]] bool is_symmetric() const noexcept { return L_A_ == L_B_; }

    friend bool operator==(const BoxGeometry &, const BoxGeometry &) = default;

  private:
    int L_A_;
    int L_B_;
};

/// (i, N+, N_A, N): blue on the left, total blue, total left, total.
struct RickLabel {
    int i = 0;
    int N_plus = 0;
    int N_A = 0;
    int N = 0;

    [[nodiscard]] int red_left() const noexcept { return N_A - i; }
    [[nodiscard]] int blue_right() const noexcept { return N_plus - i; }
    [[nodiscard]] int red_right() const noexcept { return N - N_plus - (N_A - i); }

    /// True when all four placement counts are nonnegative and fit their side.
    [[nodiscard]] bool fits(const BoxGeometry &geom) const noexcept;
    /// Throws InvalidLabel when the label does not fit.
    void validate(const BoxGeometry &geom) const;

    friend bool operator==(const RickLabel &, const RickLabel &) = default;
};

/// (N+, N_A, N). The i-sum runs over every i in [0, min(N+, N_A)]; terms that
/// overflow a side contribute zero, so no ordering between N_A and N - N_A is
/// required for the volume to be defined.
struct Morty1Label {
    int N_plus = 0;
    int N_A = 0;
    int N = 0;

    /// Ordering N_A <= N - N_A, N+ <= N - N+. Only volume preserving for a
    /// symmetric box (the color swap is always a symmetry, the side swap is not).
    [[nodiscard]] Morty1Label canonical() const noexcept;
    [[nodiscard]] bool is_canonical() const noexcept;
};

/// (N_A, N): shared by Morty 2 and Morty 3.
struct Morty2Label {
    int N_A = 0;
    int N = 0;
};

/// Proportions p_i = i/N, a = N_A/N, r = N+/N and the four cell fractions q.
struct Fractions {
    double p_i = 0.0;
    double a = 0.0;
    double r = 0.0;

    static Fractions from_label(const RickLabel &label);
    /// Cell fractions; rounding residue below 1e-12 is clamped to zero.
    [[nodiscard]] std::array<double, 4> q() const noexcept {
        std::array<double, 4> out{p_i, a - p_i, r - p_i, 1.0 - r - a + p_i};
        for (double &x : out)
            if (x < 0.0 && x > -1e-12) x = 0.0;
        return out;
    }
    /// Throws DomainError unless every q_j >= 0 (up to rounding).
    void validate() const;
};

enum class Observer { rick, morty1, morty2, morty3 };

Observer observer_from_string(std::string_view name);
std::string_view to_string(Observer observer);

/// C(n, k), zero when k > n.
ExactVolume binomial_exact(std::uint64_t n, std::uint64_t k);

/// ln C(n, k) through log-gamma. Throws DomainError when k > n or k < 0.
double log_binomial(double n, double k);

/// Natural log of a positive integer of arbitrary size.
double log_exact(const ExactVolume &value);

ExactVolume volume_rick(const BoxGeometry &geom, const RickLabel &label);
ExactVolume volume_morty1(const BoxGeometry &geom, const Morty1Label &label);
/// Plain double sum over (N+, i).
ExactVolume volume_morty2(const BoxGeometry &geom, int N_A, int N);
/// Color-swap rewrite 2 * sum_{N+ < N/2} V^M1 + [N even] V^M1(N/2); used to cross-check volume_morty2.
ExactVolume volume_morty2_symmetric(const BoxGeometry &geom, int N_A, int N);
/// Single-species volume C(L_A, N_A) C(L_B, N - N_A) assigned by an observer unaware of colors.
ExactVolume volume_morty3_perceived(const BoxGeometry &geom, int N_A, int N);
/// Dimension C(L, N+) C(L, N - N+) of the fixed-(N+, N-) block.
ExactVolume volume_accessible(const BoxGeometry &geom, int N_plus, int N);

// Log-space counterparts for geometries where exact integers are wasteful.
double log_volume_rick(const BoxGeometry &geom, const RickLabel &label);
double log_volume_morty1(const BoxGeometry &geom, const Morty1Label &label);
double log_volume_morty2(const BoxGeometry &geom, int N_A, int N);

/// Leading extensive term plus logarithmic correction for the observer's
/// macrostate containing `label` (Morty 1 reads (N+, N_A, N); Morty 2 and 3
/// read (N_A, N)). Each vanishing fraction drops its -1/2 ln(2 pi N q) term.
double stirling_log_volume(Observer observer, const BoxGeometry &geom, const RickLabel &label);

} // namespace obsmix::combinatorics
