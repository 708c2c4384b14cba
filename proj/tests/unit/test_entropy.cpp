#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "obsmix/entropy.hpp"
#include "obsmix/errors.hpp"
#include "obsmix/lattice.hpp"

using namespace obsmix::entropy;
namespace cb = obsmix::combinatorics;
namespace la = obsmix::lattice;

namespace {

std::vector<std::complex<double>> random_state(gen::Source &s, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<std::complex<double>> psi(n);
    double norm = 0.0;
    for (auto &z : psi) {
        z = {g(s.engine()), g(s.engine())};
        norm += std::norm(z);
    }
    for (auto &z : psi) z /= std::sqrt(norm);
    return psi;
}

} // namespace

TEST_CASE("Shannon entropy of simple distributions") {
    const std::vector<double> uniform(8, 0.125);
    CHECK(shannon(uniform) == doctest::Approx(std::log(8.0)));
    const std::vector<double> certain{0.0, 1.0, 0.0};
    CHECK(shannon(certain) == 0.0);
    const std::vector<double> bad{-0.1, 1.1};
    CHECK_THROWS_AS((void)shannon(bad), obsmix::DomainError);
    CHECK(binary_entropy(0.5) == doctest::Approx(std::numbers::ln2));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
}

TEST_CASE("ProbabilityVector rejects non-distributions") {
    CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6}), obsmix::DomainError);
    CHECK_THROWS_AS(ProbabilityVector({1.5, -0.5}), obsmix::DomainError);
    CHECK_NOTHROW(ProbabilityVector({0.25, 0.75}));
}

TEST_CASE("a state inside one macrostate has entropy ln V") {
    const std::vector<SectorKey> keys{{0}, {0}, {1}, {1}, {1}};
    const auto part = SectorPartition::from_keys(keys);
    REQUIRE(part.sectors().size() == 2);
    const std::vector<double> weights{0.0, 0.0, 0.2, 0.5, 0.3};
    const auto p = sector_probabilities(std::span<const double>(weights), part);
    CHECK(observational_entropy(p, part) == doctest::Approx(std::log(3.0)));
    const std::vector<cb::ExactVolume> volumes{2, 3};
    CHECK(observational_entropy(p, std::span<const cb::ExactVolume>(volumes)) == doctest::Approx(std::log(3.0)));
    CHECK(part.find({7}) == part.sectors().size());
}

TEST_CASE("property: observational entropy lies between 0 and ln dim") {
    gen::Source s(17);
    for (int trial = 0; trial < 60; ++trial) {
        const auto spec = gen::small_lattice(s);
        const auto basis = la::Basis::build(spec);
        const auto psi = random_state(s, basis.size());
        for (const auto &part : {la::rick_partition(spec, basis), la::morty_partition(spec, basis)}) {
            const double S = observational_entropy(sector_probabilities(psi, part), part);
            CHECK(S >= -1e-12);
            CHECK(S <= std::log(static_cast<double>(basis.size())) + 1e-12);
        }
    }
}

TEST_CASE("property: coarser measurements never lower observational entropy") {
    gen::Source s(29);
    for (int trial = 0; trial < 60; ++trial) {
        const auto spec = gen::small_lattice(s);
        const auto basis = la::Basis::build(spec);
        const auto rick = la::rick_partition(spec, basis);
        const auto morty = la::morty_partition(spec, basis);
        REQUIRE(rick.refines(morty));
        const auto psi = random_state(s, basis.size());
        const double S_R = observational_entropy(sector_probabilities(psi, rick), rick);
        const double S_M = observational_entropy(sector_probabilities(psi, morty), morty);
        CHECK(S_M >= S_R - 1e-12);
    }
}

TEST_CASE("segregated equal mixture gives N ln 2 for both Morty observers") {
    const cb::Fractions f{0.5, 0.5, 0.5};
    for (int N : {2, 10, 64}) {
        CHECK(entropy_diff_static(ObserverPair::rick_morty1, f, N) == doctest::Approx(N * std::numbers::ln2));
        CHECK(entropy_diff_static(ObserverPair::rick_morty2, f, N) == doctest::Approx(N * std::numbers::ln2));
        CHECK(morty_offsets(f, N).morty1_minus_morty3 == doctest::Approx(N * std::numbers::ln2));
        CHECK(morty_offsets(f, N).morty2_minus_morty3 == doctest::Approx(N * std::numbers::ln2));
    }
}

TEST_CASE("property: leading-order entropy gap tracks exact volumes") {
    // Relative error of the extensive formula shrinks as the box and N grow together.
    for (const auto &[N, w] : {std::pair{8, 80}, std::pair{32, 320}, std::pair{128, 1280}}) {
        const cb::BoxGeometry g(w, w);
        const cb::RickLabel l{N / 4, N / 2, N / 2, N};
        const auto f = cb::Fractions::from_label(l);
        const double exact = cb::log_exact(cb::volume_morty1(g, {l.N_plus, l.N_A, l.N})) -
                             cb::log_exact(cb::volume_rick(g, l));
        const double approx = entropy_diff_static(ObserverPair::rick_morty1, f, N);
        CHECK(std::abs(approx - exact) <= 2.0 * std::log(2.0 * std::numbers::pi * N));
    }
}

TEST_CASE("entropy growth vanishes for an already mixed Rick macrostate") {
    const cb::Fractions mixed{0.25, 0.5, 0.5};
    CHECK(entropy_growth(cb::Observer::rick, mixed, 20) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(entropy_growth(cb::Observer::morty1, mixed, 20) == doctest::Approx(0.0).epsilon(1e-12));
    const cb::Fractions bad{0.6, 0.5, 0.5};
    CHECK_THROWS_AS((void)entropy_growth(cb::Observer::rick, bad, 20), obsmix::DomainError);
}
