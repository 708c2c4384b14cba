#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obsmix/errors.hpp"

// Canonical statistics over a discrete spectrum and the work differences
// built on them. Entropies are in nats; a Boltzmann constant k only enters
// through T = 1/(k beta) and through the heat-capacity form.

namespace obsmix::thermo {

/// Strictly increasing energy levels with positive integer degeneracies.
class Spectrum {
  public:
    Spectrum(std::vector<double> levels, std::vector<long> degeneracies);

    /// Sorts raw eigenvalues and merges values closer than `merge_tol`
    /// (absolute, scaled by max(1, |E|)) into one degenerate level.
    static Spectrum from_eigenvalues(std::vector<double> eigenvalues, double merge_tol = 1e-10);

    [[nodiscard]] std::span<const double> levels() const noexcept { return levels_; }
    [[nodiscard]] std::span<const long> degeneracies() const noexcept { return degeneracies_; }
    [[nodiscard]] long dimension() const noexcept { return dimension_; }
    [[nodiscard]] long ground_degeneracy() const noexcept { return degeneracies_.front(); }
    [[nodiscard]] double min_energy() const noexcept { return levels_.front(); }
    [[nodiscard]] double max_energy() const noexcept { return levels_.back(); }
    [[nodiscard]] bool single_level() const noexcept { return levels_.size() == 1; }

  private:
    std::vector<double> levels_;
    std::vector<long> degeneracies_;
    long dimension_ = 0;
};

/// Thermal state data at inverse temperature beta.
///
/// v, x, y are the second, (negated) third and fourth cumulants of energy:
/// v = -d<E>/dbeta, x = dv/dbeta, y = dx/dbeta.
struct ThermalPoint {
    double beta = 0.0;
    double log_Z = 0.0;
    double mean_E = 0.0;
    double E2 = 0.0; ///< <E^2>
    double E3 = 0.0; ///< <E^3>
    double E4 = 0.0; ///< <E^4>
    double v = 0.0;
    double x = 0.0;
    double y = 0.0;
    double S_vN = 0.0;

    [[nodiscard]] double X() const { return x / v; }
    [[nodiscard]] double Y() const { return y / v; }
    [[nodiscard]] double temperature(double k = 1.0) const { return 1.0 / (k * beta); }
    /// Dimensionless heat capacity C_E / k = v beta^2.
    [[nodiscard]] double heat_capacity() const { return v * beta * beta; }
    /// T d ln(C_E/k) / dT = -(2 + beta X).
    [[nodiscard]] double log_heat_capacity_slope() const { return -(2.0 + beta * X()); }
};

/// Boltzmann sums with energies shifted by E_min, so the largest weight is 1.
ThermalPoint thermal_stats(const Spectrum &spectrum, double beta);

/// von Neumann entropy of the thermal state, the scalar behind thermal_stats.
double thermal_entropy(const Spectrum &spectrum, double beta);

/// Nonnegative beta with S_vN(beta) = target.
///
/// Targets within `tol` of ln d return exactly 0. Bisection on a doubling
/// bracket is followed by safeguarded Newton steps, so the returned root is
/// typically accurate to a few ulps, well inside `tol`.
double solve_beta_for_entropy(const Spectrum &spectrum, double S_target, double tol = 1e-10);

/// Average work of the randomize-then-extract protocol: E_init - <E>(beta*).
double observational_ergotropy(const Spectrum &spectrum, double E_init, double S_C, double tol = 1e-10);

/// <E>(beta_M) - <E>(beta_R) for the two entropy-matched thermal states.
double work_difference_exact(const Spectrum &spectrum, double S_M, double S_R, double tol = 1e-10);

/// Series solution for beta_R - beta_M from the higher-entropy point, truncated at delta^order
/// (order 1..3), with delta = dS / (v beta^2).
double delta_beta_expansion(const ThermalPoint &point, double dS, int order);

enum class ExpansionForm { moment, heat_capacity };

/// kT dS times the bracket truncated at dS^order (order 0..2).
double work_difference_expansion(const ThermalPoint &point, double dS, int order,
                                 ExpansionForm form = ExpansionForm::moment, double k = 1.0);

/// The bracket 1 - dS/(2C) + (1 - T dlnC/dT)/6 (dS/C)^2 from a heat capacity
/// C (dimensionless) and its logarithmic slope T dlnC/dT, truncated at dS^order.
double heat_capacity_bracket(double heat_capacity, double log_slope, double dS, int order);

struct WorkAverages {
    double average = 0.0;       ///< (dW1 + dW2) / 2
    double smart_average = 0.0; ///< dW2 - w2 q/(1+q), geometric tail
    bool ratio_undefined = false; ///< w1 == 0 or q == -1: smart average falls back to dW2
};

WorkAverages work_difference_averages(double dW0, double dW1, double dW2);

// Tabulated gas models: heat capacity and the second-order bracket.

enum class GasKind { ideal, debye_low_t, quantum_critical_metal, liquid_helium, s_wave_superconductor };

GasKind gas_kind_from_string(std::string_view name);
std::string_view to_string(GasKind kind);

struct GasModel {
    GasKind kind = GasKind::ideal;
    double N = 1.0;
    double T = 1.0;
    double k = 1.0;
    double A = 0.0;
    double B = 0.0;
    double Delta = 0.0;
    double m = 0.0;
    double T_D = 0.0;
    double T_c = 0.0;
    double alpha = 0.0;

    /// Throws DomainError for non-physical constants (e.g. T <= T_c for liquid helium).
    void validate() const;
};

/// C_E / k of the model at temperature T.
double gas_heat_capacity(const GasModel &model, double T);
/// T d ln(C_E/k)/dT, closed form.
double gas_log_heat_capacity_slope(const GasModel &model);

struct BracketTerms {
    double zeroth = 1.0;
    double first = 0.0;
    double second = 0.0;
    [[nodiscard]] double total() const { return zeroth + first + second; }
};

/// Term-by-term row of the gas-model table, written out per model.
BracketTerms gas_model_terms(const GasModel &model, double dS);
double gas_model_bracket(const GasModel &model, double dS);

} // namespace obsmix::thermo
