#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "obsmix/errors.hpp"
#include "obsmix/lattice.hpp"

using namespace obsmix::lattice;
namespace cb = obsmix::combinatorics;

namespace {

LatticeSpec make(int LA, int LB, int Np, int Nm) {
    LatticeSpec s;
    s.L_A = LA;
    s.L_B = LB;
    s.N_plus = Np;
    s.N_minus = Nm;
    return s;
}

std::vector<double> sorted(const Eigen::VectorXd &v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

// Single-particle band of the literal ring sum: 2 t1 cos q + 2 t2 cos 2q, plus
// the density term n_i n_{i+r} turning into n_i when r wraps onto the same site.
std::vector<double> band(int L, const Couplings &c) {
    const double self = (1 % L == 0 ? c.v1 : 0.0) + (2 % L == 0 ? c.v2 : 0.0);
    std::vector<double> e;
    for (int k = 0; k < L; ++k) {
        const double q = 2.0 * std::numbers::pi * k / L;
        e.push_back(2.0 * c.t1 * std::cos(q) + 2.0 * c.t2 * std::cos(2.0 * q) + self);
    }
    return e;
}

// Free-fermion many-body levels: sums over N distinct band states.
std::vector<double> fermi_sums(const std::vector<double> &eps, int N) {
    std::vector<double> out;
    const int L = static_cast<int>(eps.size());
    for (unsigned mask = 0; mask < (1u << L); ++mask) {
        if (std::popcount(mask) != N) continue;
        double e = 0.0;
        for (int k = 0; k < L; ++k)
            if ((mask >> k) & 1u) e += eps[k];
        out.push_back(e);
    }
    return out;
}

void check_same(std::vector<double> a, std::vector<double> b, double tol = 1e-10) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

} // namespace

TEST_CASE("basis sizes match binomial and multinomial counts") {
    for (int L = 2; L <= 8; ++L)
        for (int Np = 0; Np <= 3; ++Np)
            for (int Nm = 0; Nm <= 3; ++Nm) {
                if (Np > L || Nm > L) continue;
                auto spec = make(L / 2, L - L / 2, Np, Nm);
                CHECK(Basis::build(spec).size() ==
                      static_cast<std::size_t>(cb::binomial_exact(L, Np) * cb::binomial_exact(L, Nm)));
                if (Np + Nm > L) continue;
                spec.occupancy = Occupancy::site_exclusive;
                CHECK(Basis::build(spec).size() ==
                      static_cast<std::size_t>(cb::binomial_exact(L, Np + Nm) * cb::binomial_exact(Np + Nm, Np)));
            }
}

TEST_CASE("basis is ordered and indexable") {
    const auto spec = make(2, 2, 2, 1);
    const auto basis = Basis::build(spec);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        CHECK(basis.index_of(basis[k]) == k);
        if (k > 0) {
            const auto &a = basis[k - 1], &b = basis[k];
            CHECK((a.plus < b.plus || (a.plus == b.plus && a.minus < b.minus)));
        }
    }
    CHECK(basis.index_of({0b1111, 0}) == basis.size());
    CHECK(basis.word(basis.index_of({0b0011, 0b0001})) == "2+00");
}

TEST_CASE("single particle follows the plane-wave band on every ring length") {
    Couplings c;
    for (int L = 2; L <= 9; ++L) {
        CAPTURE(L);
        const auto spec = make(1, L - 1, 1, 0);
        const auto H = build_hamiltonian(spec, Basis::build(spec));
        check_same(sorted(eigenvalues(H)), band(L, c));
    }
}

TEST_CASE("non-interacting fermions fill the band") {
    Couplings c;
    c.v1 = c.v2 = 0.0;
    for (int L : {5, 6, 7}) {
        auto spec = make(3, L - 3, 2, 0);
        spec.couplings = c;
        const auto H = build_hamiltonian(spec, Basis::build(spec));
        check_same(sorted(eigenvalues(H)), fermi_sums(band(L, c), 2));

        spec.N_minus = 1;
        const auto H2 = build_hamiltonian(spec, Basis::build(spec));
        std::vector<double> both;
        for (double a : fermi_sums(band(L, c), 2))
            for (double b : band(L, c)) both.push_back(a + b);
        check_same(sorted(eigenvalues(H2)), both);
    }
}

TEST_CASE("property: Hamiltonian is symmetric and the color swap is isospectral") {
    gen::Source s(41);
    for (int trial = 0; trial < 30; ++trial) {
        auto spec = gen::small_lattice(s, 200);
        spec.statistics = s.integer(0, 1) ? Statistics::fermion : Statistics::hard_core_boson;
        const auto H = build_hamiltonian(spec, Basis::build(spec));
        CHECK((Eigen::MatrixXd(H) - Eigen::MatrixXd(H).transpose()).cwiseAbs().maxCoeff() == 0.0);
        auto swapped = spec;
        std::swap(swapped.N_plus, swapped.N_minus);
        check_same(sorted(eigenvalues(H)), sorted(eigenvalues(build_hamiltonian(swapped, Basis::build(swapped)))),
                   1e-9);
    }
}

TEST_CASE("property: Rick sectors have the combinatorial volumes") {
    gen::Source s(43);
    for (int trial = 0; trial < 40; ++trial) {
        const auto spec = gen::small_lattice(s);
        const auto basis = Basis::build(spec);
        const auto rick = rick_partition(spec, basis);
        for (const auto &sec : rick.sectors()) {
            const cb::RickLabel l{sec.key[0], spec.N_plus, sec.key[0] + sec.key[1], spec.particles()};
            CHECK(cb::volume_rick(spec.geometry(), l) == sec.volume());
        }
        CHECK(rick.refines(morty_partition(spec, basis)));
    }
}

TEST_CASE("lattice parameters are validated") {
    CHECK_THROWS_AS(make(2, 2, 5, 0).validate(), obsmix::DomainError);
    CHECK_THROWS_AS(make(20, 20, 1, 1).validate(), obsmix::DomainError);
    auto spec = make(2, 2, 2, 2);
    spec.occupancy = Occupancy::site_exclusive;
    CHECK_NOTHROW(spec.validate());
    spec.N_plus = 3;
    CHECK_THROWS_AS(spec.validate(), obsmix::DomainError);
    CHECK_THROWS((void)occupancy_from_string("bosonic-soup"));
}

TEST_CASE("initial states live on the target sector") {
    const auto spec = make(3, 3, 2, 1);
    const auto basis = Basis::build(spec);
    const auto rick = rick_partition(spec, basis);
    const auto sector = rick.sectors()[rick.find({2, 0})];
    for (auto mode : {InitialMode::haar, InitialMode::basis_state}) {
        const auto psi = initial_state(spec, basis, mode, 3);
        CHECK(psi.norm() == doctest::Approx(1.0));
        double inside = 0.0;
        for (auto m : sector.members) inside += std::norm(psi[static_cast<Eigen::Index>(m)]);
        CHECK(inside == doctest::Approx(1.0));
    }
    CHECK(initial_state(spec, basis, InitialMode::haar, 3) == initial_state(spec, basis, InitialMode::haar, 3));
    CHECK(initial_state(spec, basis, InitialMode::haar, 3) != initial_state(spec, basis, InitialMode::haar, 4));
    CHECK_THROWS_AS((void)initial_state(spec, basis, InitialMode::haar, 1, RickTarget{3, 0}), obsmix::DomainError);
}

TEST_CASE("Krylov and dense propagation agree") {
    const auto spec = make(3, 3, 2, 1);
    const auto basis = Basis::build(spec);
    const auto H = build_hamiltonian(spec, basis);
    const auto psi0 = initial_state(spec, basis, InitialMode::haar, 9);
    const auto times = EvolutionPlan::uniform_grid(11, 5.0);
    const auto dense = evolve_dense(diagonalize(H), psi0, times);
    const auto krylov = evolve_krylov(H, psi0, times, 1e-11, 20);
    CHECK(krylov.max_step_error <= 1e-11);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK((dense.states[k] - krylov.states[k]).norm() <= 1e-8);
        CHECK(dense.states[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(expectation(H, dense.states[k]) == doctest::Approx(expectation(H, psi0)).epsilon(1e-10));
    }
}

TEST_CASE("threaded dense propagation is bit-identical") {
    const auto spec = make(3, 3, 2, 1);
    const auto basis = Basis::build(spec);
    const auto eig = diagonalize(build_hamiltonian(spec, basis));
    const auto psi0 = initial_state(spec, basis, InitialMode::haar, 2);
    const auto times = EvolutionPlan::uniform_grid(9, 3.0);
    const auto one = evolve_dense(eig, psi0, times, 1);
    const auto four = evolve_dense(eig, psi0, times, 4);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(one.states[k] == four.states[k]);
}

TEST_CASE("evolution plans validate their grids") {
    const auto grid = EvolutionPlan::uniform_grid(5, 2.0);
    CHECK(grid == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    EvolutionPlan plan;
    plan.times = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(plan.validate(), obsmix::DomainError);
    plan.times = {-1.0, 1.0};
    CHECK_THROWS_AS(plan.validate(), obsmix::DomainError);
}

TEST_CASE("mixing time series starts at the Rick volume and conserves energy") {
    const auto spec = make(3, 3, 2, 1);
    EvolutionPlan plan;
    plan.times = EvolutionPlan::uniform_grid(12, 6.0);
    plan.seed = 5;
    const auto series = run_mixing_timeseries(spec, plan);
    const double S0 = std::log(static_cast<double>(cb::binomial_exact(3, 2) * cb::binomial_exact(3, 1)));
    CHECK(series.S_init == doctest::Approx(S0).epsilon(1e-14));
    CHECK(series.records.front().S_rick == doctest::Approx(S0).epsilon(1e-12));
    CHECK(series.S_fin == doctest::Approx(std::log(static_cast<double>(series.dimension))));
    for (const auto &r : series.records) {
        CHECK(r.E_mean == doctest::Approx(series.E0).epsilon(1e-10));
        CHECK(r.S_morty1 >= r.S_rick - 1e-12);
        CHECK(r.W >= -1e-9);
    }
}

TEST_CASE("static scan records per-point failures and continues") {
    ScanOptions opt;
    opt.spectrum_limit = 300;
    const auto records = run_static_scan({{3, 3, 2, 2}, {4, 4, 2, 2}, {2, 2, 2, 2}}, opt);
    REQUIRE(records.size() == 3);
    CHECK(records[0].error.empty());
    CHECK(records[0].dW_exact > 0.0);
    CHECK_FALSE(records[1].error.empty());
    CHECK(records[1].dim_block == 784);
    // A segregated 2 + 2 state is a single basis state: zero entropy has no finite temperature.
    CHECK(records[2].dS > 0.0);
    CHECK_FALSE(records[2].error.empty());
}

TEST_CASE("ladders follow their geometry rules") {
    const auto sym = symmetric_ladder({6, 8});
    REQUIRE(sym.size() == 2);
    CHECK(sym[1].L_A == 4);
    CHECK(sym[1].L_B == 4);
    const auto asym = asymmetric_ladder({6, 7, 8});
    CHECK(asym[0].L_B == 4);
    CHECK(asym[1].L_B == 4);
    CHECK(asym[2].L_B == 5);
    CHECK_THROWS_AS((void)symmetric_ladder({7}), obsmix::DomainError);
}
