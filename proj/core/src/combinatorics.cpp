#include "obsmix/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace obsmix::combinatorics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log(x) - (1.0 - x) * std::log1p(-x);
}

// Dilute-limit form of ln C(side, k): k (ln side - ln k + 1) - 1/2 ln(2 pi k),
// with the k = 0 term dropped entirely.
double stirling_term(double side, double k) {
    if (k <= 0.0) return 0.0;
    return k * (std::log(side) - std::log(k) + 1.0) - 0.5 * std::log(kTwoPi * k);
}

double log_sum_exp(const std::vector<double> &terms) {
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    const double peak = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    return peak + std::log(acc);
}

std::string describe(const RickLabel &l) {
    return "(i=" + std::to_string(l.i) + ", N+=" + std::to_string(l.N_plus) + ", N_A=" + std::to_string(l.N_A) +
           ", N=" + std::to_string(l.N) + ")";
}

} // namespace

BoxGeometry::BoxGeometry(int L_A, int L_B) : L_A_(L_A), L_B_(L_B) {
    if (L_A < 1 || L_B < 1)
        throw InvalidLabel("box sides must have at least one site, got L_A=" + std::to_string(L_A) +
                           ", L_B=" + std::to_string(L_B));
}

bool RickLabel::fits(const BoxGeometry &geom) const noexcept {
    const int counts[4] = {i, red_left(), blue_right(), red_right()};
    const int sides[4] = {geom.left(), geom.left(), geom.right(), geom.right()};
    if (N < 0 || N_plus < 0 || N_A < 0) return false;
    for (int j = 0; j < 4; ++j)
        if (counts[j] < 0 || counts[j] > sides[j]) return false;
    return true;
}

void RickLabel::validate(const BoxGeometry &geom) const {
    if (!fits(geom))
        throw InvalidLabel("Rick label " + describe(*this) + " does not fit L_A=" + std::to_string(geom.left()) +
                           ", L_B=" + std::to_string(geom.right()));
}

Morty1Label Morty1Label::canonical() const noexcept {
    Morty1Label out = *this;
    out.N_A = std::min(N_A, N - N_A);
    out.N_plus = std::min(N_plus, N - N_plus);
    return out;
}

bool Morty1Label::is_canonical() const noexcept { return N_A <= N - N_A && N_plus <= N - N_plus; }

Fractions Fractions::from_label(const RickLabel &label) {
    if (label.N <= 0) throw DomainError("fractions need N > 0");
    const double n = label.N;
    return {label.i / n, label.N_A / n, label.N_plus / n};
}

void Fractions::validate() const {
    for (double qj : q())
        if (qj < -1e-12) throw DomainError("fractions give a negative cell occupation q_j");
}

Observer observer_from_string(std::string_view name) {
    if (name == "rick") return Observer::rick;
    if (name == "morty1") return Observer::morty1;
    if (name == "morty2") return Observer::morty2;
    if (name == "morty3") return Observer::morty3;
    throw ConfigError("unknown observer '" + std::string(name) + "'");
}

std::string_view to_string(Observer observer) {
    switch (observer) {
    case Observer::rick: return "rick";
    case Observer::morty1: return "morty1";
    case Observer::morty2: return "morty2";
    case Observer::morty3: return "morty3";
    }
    return "?";
}

ExactVolume binomial_exact(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    ExactVolume result = 1;
    // Each partial product is itself a binomial, so the division is exact.
    for (std::uint64_t j = 1; j <= k; ++j) {
        result *= n - k + j;
        result /= j;
    }
    return result;
}

double log_binomial(double n, double k) {
    if (!(k >= 0.0) || !(k <= n)) throw DomainError("log_binomial requires 0 <= k <= n");
    const double small = std::min(k, n - k);
    if (small == 0.0) return 0.0;
    if (small <= 256.0 && small == std::floor(small)) {
        double acc = 0.0;
        for (double j = 1.0; j <= small; j += 1.0) acc += std::log((n - small + j) / j);
        return acc;
    }
    return boost::math::lgamma(n + 1.0) - boost::math::lgamma(k + 1.0) - boost::math::lgamma(n - k + 1.0);
}

// GCC 11 reports a spurious memcpy overflow inside cpp_int's copy for the shifted head.
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wstringop-overflow"
#pragma GCC diagnostic ignored "-Wstringop-overread"
#endif
double log_exact(const ExactVolume &value) {
    if (value <= 0) throw DomainError("log of a non-positive volume");
    const auto top_bit = boost::multiprecision::msb(value);
    if (top_bit < 1000) return std::log(value.convert_to<double>());
    const unsigned shift = static_cast<unsigned>(top_bit) - 62;
    const ExactVolume head = value >> shift;
    return std::log(head.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic pop
#endif

ExactVolume volume_rick(const BoxGeometry &geom, const RickLabel &label) {
    label.validate(geom);
    const auto A = static_cast<std::uint64_t>(geom.left());
    const auto B = static_cast<std::uint64_t>(geom.right());
    return binomial_exact(A, static_cast<std::uint64_t>(label.i)) *
           binomial_exact(A, static_cast<std::uint64_t>(label.red_left())) *
           binomial_exact(B, static_cast<std::uint64_t>(label.blue_right())) *
           binomial_exact(B, static_cast<std::uint64_t>(label.red_right()));
}

ExactVolume volume_morty1(const BoxGeometry &geom, const Morty1Label &label) {
    if (label.N < 0 || label.N_plus < 0 || label.N_A < 0 || label.N_plus > label.N || label.N_A > label.N)
        throw InvalidLabel("Morty 1 label requires 0 <= N+, N_A <= N");
    ExactVolume total = 0;
    for (int i = 0; i <= std::min(label.N_plus, label.N_A); ++i) {
        const RickLabel rick{i, label.N_plus, label.N_A, label.N};
        if (rick.fits(geom)) total += volume_rick(geom, rick);
    }
    return total;
}

ExactVolume volume_morty2(const BoxGeometry &geom, int N_A, int N) {
    if (N < 0 || N_A < 0 || N_A > N) throw InvalidLabel("Morty 2 label requires 0 <= N_A <= N");
    ExactVolume total = 0;
    for (int n_plus = 0; n_plus <= N; ++n_plus) total += volume_morty1(geom, {n_plus, N_A, N});
    return total;
}

ExactVolume volume_morty2_symmetric(const BoxGeometry &geom, int N_A, int N) {
    if (N < 0 || N_A < 0 || N_A > N) throw InvalidLabel("Morty 2 label requires 0 <= N_A <= N");
    ExactVolume half = 0;
    for (int n_plus = 0; 2 * n_plus < N; ++n_plus) half += volume_morty1(geom, {n_plus, N_A, N});
    ExactVolume total = 2 * half;
    if (N % 2 == 0) total += volume_morty1(geom, {N / 2, N_A, N});
    return total;
}

ExactVolume volume_morty3_perceived(const BoxGeometry &geom, int N_A, int N) {
    if (N_A < 0 || N_A > N || N_A > geom.left() || N - N_A > geom.right())
        throw InvalidLabel("Morty 3 label (N_A=" + std::to_string(N_A) + ", N=" + std::to_string(N) +
                           ") exceeds side capacity");
    return binomial_exact(static_cast<std::uint64_t>(geom.left()), static_cast<std::uint64_t>(N_A)) *
           binomial_exact(static_cast<std::uint64_t>(geom.right()), static_cast<std::uint64_t>(N - N_A));
}

ExactVolume volume_accessible(const BoxGeometry &geom, int N_plus, int N) {
    if (N_plus < 0 || N_plus > N) throw InvalidLabel("accessible volume requires 0 <= N+ <= N");
    const auto L = static_cast<std::uint64_t>(geom.total());
    return binomial_exact(L, static_cast<std::uint64_t>(N_plus)) *
           binomial_exact(L, static_cast<std::uint64_t>(N - N_plus));
}

double log_volume_rick(const BoxGeometry &geom, const RickLabel &label) {
    label.validate(geom);
    return log_binomial(geom.left(), label.i) + log_binomial(geom.left(), label.red_left()) +
           log_binomial(geom.right(), label.blue_right()) + log_binomial(geom.right(), label.red_right());
}

double log_volume_morty1(const BoxGeometry &geom, const Morty1Label &label) {
    std::vector<double> terms;
    for (int i = 0; i <= std::min(label.N_plus, label.N_A); ++i) {
        const RickLabel rick{i, label.N_plus, label.N_A, label.N};
        if (rick.fits(geom)) terms.push_back(log_volume_rick(geom, rick));
    }
    if (terms.empty()) throw InvalidLabel("Morty 1 macrostate is empty for this geometry");
    return log_sum_exp(terms);
}

double log_volume_morty2(const BoxGeometry &geom, int N_A, int N) {
    std::vector<double> terms;
    for (int n_plus = 0; n_plus <= N; ++n_plus) {
        for (int i = 0; i <= std::min(n_plus, N_A); ++i) {
            const RickLabel rick{i, n_plus, N_A, N};
            if (rick.fits(geom)) terms.push_back(log_volume_rick(geom, rick));
        }
    }
    if (terms.empty()) throw InvalidLabel("Morty 2 macrostate is empty for this geometry");
    return log_sum_exp(terms);
}

double stirling_log_volume(Observer observer, const BoxGeometry &geom, const RickLabel &label) {
    if (label.N == 0) return 0.0;
    const double A = geom.left();
    const double B = geom.right();
    const double N = label.N;
    const double a = label.N_A / N;
    const double r = label.N_plus / N;
    // ln w -> a ln L_A + (1 - a) ln L_B for unequal sides.
    const double log_side = a * std::log(A) + (1.0 - a) * std::log(B);
    const double two_pi_n = kTwoPi * N;

    auto rick = [&](const RickLabel &l) {
        return stirling_term(A, l.i) + stirling_term(A, l.red_left()) + stirling_term(B, l.blue_right()) +
               stirling_term(B, l.red_right());
    };

    switch (observer) {
    case Observer::rick: return rick(label);
    case Observer::morty1: {
        const bool interior = label.N_A > 0 && label.N_A < label.N && label.N_plus > 0 && label.N_plus < label.N;
        if (!interior) {
            // One admissible i: the i-sum collapses to a single Rick term.
            const int i = (label.N_plus == 0 || label.N_A == 0) ? 0
                          : (label.N_plus == label.N)          ? label.N_A
                                                               : label.N_plus;
            return rick({i, label.N_plus, label.N_A, label.N});
        }
        return N * (log_side - std::log(N) + binary_entropy(a) + binary_entropy(r) + 1.0) - 1.5 * std::log(two_pi_n);
    }
    case Observer::morty2: {
        // Empty side: the N+ sum is Vandermonde's identity, C(2 L_side, N).
        if (label.N_A == 0) return stirling_term(2.0 * B, N);
        if (label.N_A == label.N) return stirling_term(2.0 * A, N);
        return N * (log_side - std::log(N) + binary_entropy(a) + std::numbers::ln2 + 1.0) -
               std::log(2.0 * two_pi_n);
    }
    case Observer::morty3: return stirling_term(A, label.N_A) + stirling_term(B, label.N - label.N_A);
    }
    return 0.0;
}

} // namespace obsmix::combinatorics
