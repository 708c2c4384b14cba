#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "obsmix/errors.hpp"
#include "obsmix/thermo.hpp"

using namespace obsmix::thermo;

namespace {

Spectrum two_level(double gap) { return Spectrum({0.0, gap}, {1, 1}); }

// Closed-form entropy of a nondegenerate two-level system.
double two_level_entropy(double gap, double beta) {
    const double p = 1.0 / (1.0 + std::exp(beta * gap));
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

Spectrum random_spectrum(gen::Source &s) {
    auto [levels, deg] = gen::spectrum(s);
    return Spectrum(levels, deg);
}

std::vector<GasModel> gas_models() {
    std::vector<GasModel> out;
    GasModel ideal;
    ideal.N = 3.0;
    ideal.T = 2.0;
    out.push_back(ideal);
    GasModel debye;
    debye.kind = GasKind::debye_low_t;
    debye.N = 2.0;
    debye.T = 0.7;
    debye.T_D = 10.0;
    out.push_back(debye);
    GasModel qcm;
    qcm.kind = GasKind::quantum_critical_metal;
    qcm.N = 2.0;
    qcm.T = 0.8;
    qcm.A = 1.5;
    qcm.m = 2.0;
    out.push_back(qcm);
    GasModel helium;
    helium.kind = GasKind::liquid_helium;
    helium.N = 1.0;
    helium.T = 2.5;
    helium.T_c = 2.17;
    helium.A = 1.0;
    helium.B = 0.5;
    helium.alpha = 0.1;
    out.push_back(helium);
    GasModel sc;
    sc.kind = GasKind::s_wave_superconductor;
    sc.N = 1.0;
    sc.T = 0.5;
    sc.A = 2.0;
    sc.Delta = 1.2;
    out.push_back(sc);
    return out;
}

} // namespace

TEST_CASE("spectrum construction validates its input") {
    CHECK_THROWS_AS(Spectrum({0.0, 0.0}, {1, 1}), obsmix::DomainError);
    CHECK_THROWS_AS(Spectrum({0.0, 1.0}, {1, 0}), obsmix::DomainError);
    CHECK_THROWS_AS(Spectrum({}, {}), obsmix::DomainError);
    const auto merged = Spectrum::from_eigenvalues({1.0, -2.0, 1.0 + 1e-13, 3.0});
    REQUIRE(merged.levels().size() == 3);
    CHECK(merged.degeneracies()[1] == 2);
    CHECK(merged.dimension() == 4);
}

TEST_CASE("two-level system matches its closed form") {
    const auto sp = two_level(1.3);
    for (double beta : {0.0, 0.1, 1.0, 4.0, 30.0}) {
        const auto pt = thermal_stats(sp, beta);
        const double p = 1.0 / (1.0 + std::exp(beta * 1.3));
        CHECK(pt.S_vN == doctest::Approx(two_level_entropy(1.3, beta)).epsilon(1e-12));
        CHECK(pt.mean_E == doctest::Approx(1.3 * p));
        CHECK(pt.v == doctest::Approx(1.3 * 1.3 * p * (1.0 - p)));
    }
    CHECK(solve_beta_for_entropy(sp, two_level_entropy(1.3, 0.77)) == doctest::Approx(0.77).epsilon(1e-10));
}

TEST_CASE("property: cumulants are successive beta derivatives") {
    gen::Source s(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto sp = random_spectrum(s);
        const double beta = s.real(0.05, 3.0);
        const double h = 1e-4;
        const auto lo = thermal_stats(sp, beta - h), mid = thermal_stats(sp, beta), hi = thermal_stats(sp, beta + h);
        const double scale = 1.0 + std::abs(mid.v);
        CHECK(std::abs(-(hi.mean_E - lo.mean_E) / (2 * h) - mid.v) <= 1e-6 * scale);
        CHECK(std::abs((hi.v - lo.v) / (2 * h) - mid.x) <= 1e-6 * (1.0 + std::abs(mid.x)));
        CHECK(std::abs((hi.x - lo.x) / (2 * h) - mid.y) <= 1e-6 * (1.0 + std::abs(mid.y)));
        // dS/dbeta = -beta v
        CHECK(std::abs((hi.S_vN - lo.S_vN) / (2 * h) + beta * mid.v) <= 1e-6 * scale);
    }
}

TEST_CASE("property: solver round-trips random targets") {
    gen::Source s(6);
    for (int trial = 0; trial < 40; ++trial) {
        const auto sp = random_spectrum(s);
        const double lo = std::log(static_cast<double>(sp.ground_degeneracy()));
        const double hi = std::log(static_cast<double>(sp.dimension()));
        for (int k = 0; k < 10; ++k) {
            const double target = s.real(lo + 1e-6, hi);
            const double beta = solve_beta_for_entropy(sp, target);
            CHECK(beta >= 0.0);
            CHECK(std::abs(thermal_entropy(sp, beta) - target) <= 1e-10);
        }
        CHECK(solve_beta_for_entropy(sp, hi) == 0.0);
        CHECK_THROWS_AS((void)solve_beta_for_entropy(sp, hi + 0.1), obsmix::OutOfRange);
        CHECK_THROWS_AS((void)solve_beta_for_entropy(sp, lo), obsmix::OutOfRange);
    }
    CHECK_THROWS_AS((void)solve_beta_for_entropy(Spectrum({1.0}, {4}), 1.0), obsmix::Degenerate);
}

TEST_CASE("property: heat-capacity and moment forms of the expansion coincide") {
    gen::Source s(7);
    for (int trial = 0; trial < 60; ++trial) {
        const auto sp = random_spectrum(s);
        const auto pt = thermal_stats(sp, s.real(0.1, 3.0));
        const double dS = s.real(0.0, 0.5);
        for (int order = 0; order <= 2; ++order) {
            const double a = work_difference_expansion(pt, dS, order, ExpansionForm::moment);
            const double b = work_difference_expansion(pt, dS, order, ExpansionForm::heat_capacity);
            CHECK(a == doctest::Approx(b).epsilon(1e-11));
        }
    }
}

TEST_CASE("beta shift series converges to the solved shift") {
    const Spectrum sp({0.0, 0.4, 1.1, 2.0}, {1, 3, 3, 1});
    const double S_M = 1.5;
    const double beta_M = solve_beta_for_entropy(sp, S_M, 1e-14);
    const auto pt = thermal_stats(sp, beta_M);
    double previous = 1.0;
    for (double dS : {0.1, 0.01, 0.001}) {
        const double exact = solve_beta_for_entropy(sp, S_M - dS, 1e-14) - beta_M;
        const double err = std::abs(delta_beta_expansion(pt, dS, 3) - exact);
        CHECK(err < previous);
        previous = err;
        CHECK(std::abs(delta_beta_expansion(pt, dS, 1) - exact) > err);
    }
}

TEST_CASE("work averages follow their definitions") {
    const auto w = work_difference_averages(1.0, 0.5, 0.75);
    CHECK(w.average == doctest::Approx(0.625));
    // w1 = -0.5, w2 = 0.25, q = -0.5: 0.75 - 0.25 * (-0.5) / 0.5
    CHECK(w.smart_average == doctest::Approx(1.0));
    CHECK_FALSE(w.ratio_undefined);
    const auto flat = work_difference_averages(1.0, 1.0, 1.2);
    CHECK(flat.ratio_undefined);
    CHECK(flat.smart_average == 1.2);
}

TEST_CASE("ideal-gas bracket at dS/N = ln 2") {
    GasModel gas;
    const double u = std::numbers::ln2;
    const double closed = 1.0 - u / 3.0 + 2.0 * u * u / 27.0;
    CHECK(gas_model_bracket(gas, u) == doctest::Approx(closed).epsilon(1e-14));
    CHECK(std::abs(gas_model_bracket(gas, u) - 0.805) < 5e-4);
}

TEST_CASE("property: tabulated rows equal the general heat-capacity bracket") {
    for (const auto &g : gas_models()) {
        CAPTURE(to_string(g.kind));
        for (double dS : {0.01, 0.1, 0.4}) {
            const double general = heat_capacity_bracket(gas_heat_capacity(g, g.T), gas_log_heat_capacity_slope(g), dS, 2);
            CHECK(gas_model_bracket(g, dS) == doctest::Approx(general).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: log heat-capacity slope matches a finite difference") {
    for (const auto &g : gas_models()) {
        CAPTURE(to_string(g.kind));
        const double h = 1e-5 * g.T;
        const double fd = g.T * (std::log(gas_heat_capacity(g, g.T + h)) - std::log(gas_heat_capacity(g, g.T - h))) / (2 * h);
        CHECK(gas_log_heat_capacity_slope(g) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("gas models reject non-physical constants") {
    GasModel helium;
    helium.kind = GasKind::liquid_helium;
    helium.T = 2.0;
    helium.T_c = 2.17;
    helium.A = helium.B = 1.0;
    helium.alpha = 0.1;
    CHECK_THROWS_AS(helium.validate(), obsmix::DomainError);
    GasModel ideal;
    ideal.N = -1.0;
    CHECK_THROWS_AS(ideal.validate(), obsmix::DomainError);
    CHECK_THROWS_AS((void)gas_kind_from_string("plasma"), obsmix::ConfigError);
    CHECK(gas_kind_from_string("debye") == GasKind::debye_low_t);
}
