#include "obsmix/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace obsmix::thermo {

Spectrum::Spectrum(std::vector<double> levels, std::vector<long> degeneracies)
    : levels_(std::move(levels)), degeneracies_(std::move(degeneracies)) {
    if (levels_.empty() || levels_.size() != degeneracies_.size())
        throw DomainError("spectrum needs one degeneracy per level and at least one level");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!std::isfinite(levels_[i])) throw DomainError("non-finite energy level");
        if (degeneracies_[i] < 1) throw DomainError("degeneracies must be positive");
        if (i > 0 && !(levels_[i] > levels_[i - 1])) throw DomainError("levels must be strictly increasing");
        dimension_ += degeneracies_[i];
    }
}

Spectrum Spectrum::from_eigenvalues(std::vector<double> eigenvalues, double merge_tol) {
    if (eigenvalues.empty()) throw DomainError("empty eigenvalue list");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    std::vector<double> levels;
    std::vector<long> degeneracies;
    for (double e : eigenvalues) {
        if (!levels.empty() && e - levels.back() <= merge_tol * std::max(1.0, std::abs(e))) {
            ++degeneracies.back();
        } else {
            levels.push_back(e);
            degeneracies.push_back(1);
        }
    }
    return {std::move(levels), std::move(degeneracies)};
}

namespace {

struct ShiftedSums {
    double Z = 0.0;      // sum g exp(-beta (E - E_min))
    double mean = 0.0;   // <E - E_min>
};

void check_beta(double beta) {
    if (!std::isfinite(beta) || beta < 0.0) throw DomainError("beta must be finite and nonnegative");
}

ShiftedSums shifted_sums(const Spectrum &spectrum, double beta) {
    const auto levels = spectrum.levels();
    const auto degs = spectrum.degeneracies();
    const double e0 = spectrum.min_energy();
    ShiftedSums s;
    double first = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double w = static_cast<double>(degs[i]) * std::exp(-beta * (levels[i] - e0));
        s.Z += w;
        first += w * (levels[i] - e0);
    }
    if (!std::isfinite(s.Z) || s.Z < static_cast<double>(spectrum.ground_degeneracy()) * (1.0 - 1e-12))
        throw DomainError("Boltzmann sum overflowed after ground-state shift");
    s.mean = first / s.Z;
    return s;
}

} // namespace

ThermalPoint thermal_stats(const Spectrum &spectrum, double beta) {
    check_beta(beta);
    const auto s = shifted_sums(spectrum, beta);
    const auto levels = spectrum.levels();
    const auto degs = spectrum.degeneracies();
    const double e0 = spectrum.min_energy();

    ThermalPoint p;
    p.beta = beta;
    p.log_Z = std::log(s.Z) - beta * e0;
    p.mean_E = e0 + s.mean;

    // Central moments around the mean avoid cancellation in the cumulants.
    double mu2 = 0.0, mu3 = 0.0, mu4 = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double w = static_cast<double>(degs[i]) * std::exp(-beta * (levels[i] - e0)) / s.Z;
        const double d = levels[i] - e0 - s.mean;
        const double d2 = d * d;
        mu2 += w * d2;
        mu3 += w * d2 * d;
        mu4 += w * d2 * d2;
    }
    const double m1 = p.mean_E;
    p.E2 = mu2 + m1 * m1;
    p.E3 = mu3 + 3.0 * m1 * mu2 + m1 * m1 * m1;
    p.E4 = mu4 + 4.0 * m1 * mu3 + 6.0 * m1 * m1 * mu2 + m1 * m1 * m1 * m1;
    p.v = mu2;
    p.x = -mu3;
    p.y = mu4 - 3.0 * mu2 * mu2;
    // ln Z + beta <E>, with the E_min shift cancelled analytically.
    p.S_vN = std::log(s.Z) + beta * s.mean;
    return p;
}

double thermal_entropy(const Spectrum &spectrum, double beta) {
    check_beta(beta);
    const auto s = shifted_sums(spectrum, beta);
    return std::log(s.Z) + beta * s.mean;
}

double solve_beta_for_entropy(const Spectrum &spectrum, double S_target, double tol) {
    if (spectrum.single_level()) throw Degenerate("single-level spectrum has no observational temperature");
    if (!std::isfinite(S_target)) throw OutOfRange("non-finite entropy target", S_target);
    const double S_max = std::log(static_cast<double>(spectrum.dimension()));
    const double S_min = std::log(static_cast<double>(spectrum.ground_degeneracy()));
    if (std::abs(S_target - S_max) <= tol) return 0.0;
    if (S_target > S_max)
        throw OutOfRange("entropy target " + std::to_string(S_target) + " exceeds ln d = " + std::to_string(S_max),
                         S_target);
    if (S_target < S_min + tol)
        throw OutOfRange("entropy target " + std::to_string(S_target) + " is not above ln g0 = " +
                             std::to_string(S_min),
                         S_target);

    const double spread = spectrum.max_energy() - spectrum.min_energy();
    double lo = 0.0;
    double hi = 1.0 / spread;
    while (thermal_entropy(spectrum, hi) > S_target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw OutOfRange("could not bracket the entropy target", S_target);
    }
    // S is strictly decreasing in beta on [0, inf).
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (thermal_entropy(spectrum, mid) > S_target)
            lo = mid;
        else
            hi = mid;
    }
    double beta = 0.5 * (lo + hi);
    // dS/dbeta = -beta v; a couple of Newton steps remove the last ulps of bisection bias.
    for (int iter = 0; iter < 3; ++iter) {
        const auto p = thermal_stats(spectrum, beta);
        const double slope = -beta * p.v;
        if (!(slope < 0.0)) break;
        const double next = beta - (p.S_vN - S_target) / slope;
        if (!(next >= lo && next <= hi)) break;
        beta = next;
    }
    return beta;
}

double observational_ergotropy(const Spectrum &spectrum, double E_init, double S_C, double tol) {
    const double beta = solve_beta_for_entropy(spectrum, S_C, tol);
    return E_init - thermal_stats(spectrum, beta).mean_E;
}

double work_difference_exact(const Spectrum &spectrum, double S_M, double S_R, double tol) {
    if (S_M == S_R) return 0.0;
    const double beta_M = solve_beta_for_entropy(spectrum, S_M, tol);
    const double beta_R = solve_beta_for_entropy(spectrum, S_R, tol);
    return thermal_stats(spectrum, beta_M).mean_E - thermal_stats(spectrum, beta_R).mean_E;
}

double delta_beta_expansion(const ThermalPoint &point, double dS, int order) {
    if (order < 1 || order > 3) throw DomainError("delta-beta series order must be 1, 2 or 3");
    if (dS == 0.0) return 0.0;
    if (point.beta == 0.0) throw DomainError("delta-beta series is undefined at beta = 0");
    if (!(point.v > 0.0)) throw DomainError("delta-beta series needs a positive energy variance");
    const double b = point.beta;
    const double X = point.X();
    const double Y = point.Y();
    const double delta = dS / (point.v * b * b);
    double series = 1.0;
    if (order >= 2) series -= 0.5 * (1.0 + b * X) * delta;
    if (order >= 3) series += (3.0 + 4.0 * b * X + 3.0 * b * b * X * X - b * b * Y) / 6.0 * delta * delta;
    return b * delta * series;
}

double heat_capacity_bracket(double heat_capacity, double log_slope, double dS, int order) {
    if (order < 0 || order > 2) throw DomainError("work expansion order must be 0, 1 or 2");
    const double u = dS / heat_capacity;
    double bracket = 1.0;
    if (order >= 1) bracket -= 0.5 * u;
    if (order >= 2) bracket += (1.0 - log_slope) / 6.0 * u * u;
    return bracket;
}

double work_difference_expansion(const ThermalPoint &point, double dS, int order, ExpansionForm form, double k) {
    if (order < 0 || order > 2) throw DomainError("work expansion order must be 0, 1 or 2");
    if (!(point.beta > 0.0)) throw DomainError("work expansion needs a finite temperature (beta > 0)");
    if (!(point.v > 0.0)) throw DomainError("work expansion needs a positive energy variance");
    const double kT = 1.0 / point.beta;
    double bracket = 1.0;
    if (form == ExpansionForm::moment) {
        if (order >= 1) bracket -= kT * kT / (2.0 * point.v) * dS;
        if (order >= 2) bracket += (3.0 * kT + point.X()) * kT * kT * kT / (6.0 * point.v * point.v) * dS * dS;
    } else {
        bracket = heat_capacity_bracket(point.heat_capacity(), point.log_heat_capacity_slope(), dS, order);
    }
    // kT is 1/beta whatever k is; k only rescales how T is reported.
    (void)k;
    return kT * dS * bracket;
}

WorkAverages work_difference_averages(double dW0, double dW1, double dW2) {
    WorkAverages out;
    out.average = 0.5 * (dW1 + dW2);
    const double w1 = dW1 - dW0;
    const double w2 = dW2 - dW1;
    if (w1 == 0.0) {
        out.smart_average = dW2;
        out.ratio_undefined = w2 != 0.0;
        return out;
    }
    const double q = w2 / w1;
    if (1.0 + q == 0.0) {
        out.smart_average = dW2;
        out.ratio_undefined = true;
        return out;
    }
    out.smart_average = dW2 - w2 * q / (1.0 + q);
    return out;
}

GasKind gas_kind_from_string(std::string_view name) {
    if (name == "ideal") return GasKind::ideal;
    if (name == "debye-low-T" || name == "debye") return GasKind::debye_low_t;
    if (name == "quantum-critical-metal") return GasKind::quantum_critical_metal;
    if (name == "liquid-helium") return GasKind::liquid_helium;
    if (name == "s-wave-superconductor") return GasKind::s_wave_superconductor;
    throw ConfigError("unknown gas model '" + std::string(name) + "'");
}

std::string_view to_string(GasKind kind) {
    switch (kind) {
    case GasKind::ideal: return "ideal";
    case GasKind::debye_low_t: return "debye-low-T";
    case GasKind::quantum_critical_metal: return "quantum-critical-metal";
    case GasKind::liquid_helium: return "liquid-helium";
    case GasKind::s_wave_superconductor: return "s-wave-superconductor";
    }
    return "?";
}

void GasModel::validate() const {
    auto positive = [](double value, const char *name) {
        if (!(value > 0.0) || !std::isfinite(value))
            throw DomainError(std::string("gas model constant ") + name + " must be positive");
    };
    positive(N, "N");
    positive(T, "T");
    positive(k, "k");
    switch (kind) {
    case GasKind::ideal: break;
    case GasKind::debye_low_t: positive(T_D, "T_D"); break;
    case GasKind::quantum_critical_metal:
        positive(m, "m");
        if (A < 0.0) throw DomainError("gas model constant A must be nonnegative");
        break;
    case GasKind::liquid_helium:
        positive(T_c, "T_c");
        positive(A, "A");
        positive(B, "B");
        positive(alpha, "alpha");
        if (!(T > T_c)) throw DomainError("liquid helium expansion needs T > T_c");
        break;
    case GasKind::s_wave_superconductor:
        positive(A, "A");
        if (Delta < 0.0) throw DomainError("gap Delta must be nonnegative");
        break;
    }
}

double gas_heat_capacity(const GasModel &g, double T) {
    switch (g.kind) {
    case GasKind::ideal: return 1.5 * g.N;
    case GasKind::debye_low_t: return 324.0 * g.N * std::pow(T / g.T_D, 3);
    case GasKind::quantum_critical_metal:
        return std::numbers::pi / 6.0 * g.m * g.N * T * (1.0 + g.A / (g.N * std::cbrt(T))) / g.k;
    case GasKind::liquid_helium: {
        const double t = T / g.T_c - 1.0;
        return g.N * (g.A + g.B * std::pow(t, -g.alpha));
    }
    case GasKind::s_wave_superconductor: return g.A * g.N * std::sqrt(T) * std::exp(-g.Delta / (g.k * T));
    }
    return 0.0;
}

double gas_log_heat_capacity_slope(const GasModel &g) {
    const double T = g.T;
    switch (g.kind) {
    case GasKind::ideal: return 0.0;
    case GasKind::debye_low_t: return 3.0;
    case GasKind::quantum_critical_metal: {
        const double ratio = g.A / (g.N * std::cbrt(T));
        return 1.0 - ratio / (3.0 * (1.0 + ratio));
    }
    case GasKind::liquid_helium: {
        const double t = T / g.T_c - 1.0;
        return -g.alpha * (1.0 + t) / ((1.0 + g.A / g.B * std::pow(t, g.alpha)) * t);
    }
    case GasKind::s_wave_superconductor: return 0.5 + g.Delta / (g.k * T);
    }
    return 0.0;
}

BracketTerms gas_model_terms(const GasModel &g, double dS) {
    g.validate();
    const double N = g.N;
    const double T = g.T;
    BracketTerms out;
    switch (g.kind) {
    case GasKind::ideal: {
        const double u = dS / N;
        out.first = -u / 3.0;
        out.second = 2.0 / 27.0 * u * u;
        break;
    }
    case GasKind::debye_low_t: {
        const double u = dS / (324.0 * N) * std::pow(g.T_D / T, 3);
        out.first = -0.5 * u;
        out.second = -u * u / 3.0;
        break;
    }
    case GasKind::quantum_critical_metal: {
        const double u = dS / (N * T * (1.0 + g.A / (N * std::cbrt(T))));
        const double pm = std::numbers::pi * g.m;
        out.first = -3.0 * g.k / pm * u;
        out.second = 2.0 * g.k * g.k / (pm * pm * (1.0 + N * std::cbrt(T) / g.A)) * u * u;
        break;
    }
    case GasKind::liquid_helium: {
        const double t = T / g.T_c - 1.0;
        const double u = dS / (N * (g.A + g.B * std::pow(t, -g.alpha)));
        out.first = -0.5 * u;
        out.second = (1.0 + (1.0 + t) * g.alpha / ((1.0 + g.A / g.B * std::pow(t, g.alpha)) * t)) / 6.0 * u * u;
        break;
    }
    case GasKind::s_wave_superconductor: {
        const double u = dS * std::exp(g.Delta / (g.k * T)) / (g.A * N * std::sqrt(T));
        out.first = -0.5 * u;
        out.second = (1.0 - 2.0 * g.Delta / (g.k * T)) / 12.0 * u * u;
        break;
    }
    }
    return out;
}

double gas_model_bracket(const GasModel &model, double dS) { return gas_model_terms(model, dS).total(); }

} // namespace obsmix::thermo
