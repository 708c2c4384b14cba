#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "obsmix/combinatorics.hpp"
#include "obsmix/errors.hpp"

using namespace obsmix::combinatorics;

namespace {

// Rows of Pascal's triangle by addition only.
std::vector<std::vector<ExactVolume>> pascal(int rows) {
    std::vector<std::vector<ExactVolume>> t(static_cast<std::size_t>(rows) + 1);
    for (int n = 0; n <= rows; ++n) {
        t[n].assign(static_cast<std::size_t>(n) + 1, 1);
        for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
}

// Rick volume by enumerating colored occupations of a small box.
ExactVolume enumerate_rick(const BoxGeometry &g, const RickLabel &l) {
    const int L = g.total();
    ExactVolume count = 0;
    for (unsigned plus = 0; plus < (1u << L); ++plus)
        for (unsigned minus = 0; minus < (1u << L); ++minus) {
            const unsigned left = (1u << g.left()) - 1u;
            const int blue = std::popcount(plus), red = std::popcount(minus);
            const int blue_left = std::popcount(plus & left), red_left = std::popcount(minus & left);
            if (blue == l.N_plus && blue + red == l.N && blue_left == l.i && blue_left + red_left == l.N_A) ++count;
        }
    return count;
}

} // namespace

TEST_CASE("binomial_exact agrees with Pascal's triangle") {
    const auto t = pascal(60);
    for (int n = 0; n <= 60; ++n)
        for (int k = 0; k <= n; ++k) CHECK(binomial_exact(n, k) == t[n][k]);
    CHECK(binomial_exact(5, 7) == 0);
}

TEST_CASE("log_binomial matches the exact logarithm") {
    for (int n : {1, 7, 40, 300, 2000})
        for (int k : {0, 1, n / 3, n / 2, n})
            CHECK(log_binomial(n, k) == doctest::Approx(log_exact(binomial_exact(n, k))).epsilon(1e-12));
    CHECK_THROWS_AS((void)log_binomial(3, 4), obsmix::DomainError);
    CHECK_THROWS_AS((void)log_binomial(3, -1), obsmix::DomainError);
}

TEST_CASE("log_exact handles integers far beyond double range") {
    ExactVolume big = 1;
    big <<= 3000;
    CHECK(log_exact(big) == doctest::Approx(3000 * std::numbers::ln2).epsilon(1e-14));
    CHECK(log_exact(ExactVolume(100)) == doctest::Approx(std::log(100.0)));
    CHECK_THROWS_AS((void)log_exact(ExactVolume(0)), obsmix::DomainError);
}

TEST_CASE("Rick volume of the reference label on a 5 + 5 box") {
    const BoxGeometry g(5, 5);
    CHECK(volume_rick(g, {3, 3, 3, 6}) == 100);
    CHECK(log_exact(volume_rick(g, {3, 3, 3, 6})) == doctest::Approx(std::log(100.0)));
}

TEST_CASE("Rick volume equals brute-force enumeration") {
    for (int LA = 1; LA <= 3; ++LA)
        for (int LB = 1; LB <= 3; ++LB) {
            const BoxGeometry g(LA, LB);
            for (int N = 0; N <= 4; ++N)
                for (int Np = 0; Np <= N; ++Np)
                    for (int NA = 0; NA <= N; ++NA)
                        for (int i = 0; i <= std::min(Np, NA); ++i) {
                            const RickLabel l{i, Np, NA, N};
                            const ExactVolume expected = enumerate_rick(g, l);
                            if (l.fits(g))
                                CHECK(volume_rick(g, l) == expected);
                            else
                                CHECK(expected == 0);
                        }
        }
}

TEST_CASE("labels that overflow a side are rejected") {
    const BoxGeometry g(2, 3);
    CHECK_FALSE(RickLabel{3, 3, 3, 3}.fits(g));
    CHECK_THROWS_AS((void)volume_rick(g, {3, 3, 3, 3}), obsmix::InvalidLabel);
    CHECK_THROWS_AS((void)volume_rick(g, {0, 1, 0, 0}), obsmix::InvalidLabel);
    CHECK_THROWS_AS(BoxGeometry(0, 3), obsmix::InvalidLabel);
}

TEST_CASE("empty lattice has unit volume for every observer") {
    const BoxGeometry g(4, 4);
    CHECK(volume_rick(g, {0, 0, 0, 0}) == 1);
    CHECK(volume_morty1(g, {0, 0, 0}) == 1);
    CHECK(volume_morty2(g, 0, 0) == 1);
    CHECK(volume_morty3_perceived(g, 0, 0) == 1);
    for (auto o : {Observer::rick, Observer::morty1, Observer::morty2, Observer::morty3})
        CHECK(stirling_log_volume(o, g, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("property: color swap maps Rick volumes onto each other") {
    gen::Source s(101);
    for (int trial = 0; trial < 500; ++trial) {
        const BoxGeometry g(s.integer(1, 9), s.integer(1, 9));
        const RickLabel l = gen::rick_label(s, g);
        const RickLabel swapped{l.red_left(), l.N - l.N_plus, l.N_A, l.N};
        REQUIRE(swapped.fits(g));
        CHECK(volume_rick(g, l) == volume_rick(g, swapped));
    }
}

TEST_CASE("property: Morty 2 rewrite agrees with the plain double sum") {
    gen::Source s(202);
    for (int trial = 0; trial < 300; ++trial) {
        const BoxGeometry g(s.integer(1, 12), s.integer(1, 12));
        const int N = s.integer(0, g.total());
        const int NA = s.integer(std::max(0, N - g.right()), std::min(N, g.left()));
        CHECK(volume_morty2_symmetric(g, NA, N) == volume_morty2(g, NA, N));
    }
}

TEST_CASE("property: log-space volumes track exact volumes") {
    gen::Source s(303);
    for (int trial = 0; trial < 300; ++trial) {
        const BoxGeometry g(s.integer(1, 40), s.integer(1, 40));
        const RickLabel l = gen::rick_label(s, g);
        CHECK(log_volume_rick(g, l) == doctest::Approx(log_exact(volume_rick(g, l))).epsilon(1e-11));
        const Morty1Label m{l.N_plus, l.N_A, l.N};
        CHECK(log_volume_morty1(g, m) == doctest::Approx(log_exact(volume_morty1(g, m))).epsilon(1e-11));
        CHECK(log_volume_morty2(g, l.N_A, l.N) == doctest::Approx(log_exact(volume_morty2(g, l.N_A, l.N))).epsilon(1e-11));
    }
}

TEST_CASE("property: Morty volumes nest") {
    gen::Source s(404);
    for (int trial = 0; trial < 300; ++trial) {
        const BoxGeometry g(s.integer(1, 10), s.integer(1, 10));
        const RickLabel l = gen::rick_label(s, g);
        const ExactVolume r = volume_rick(g, l);
        const ExactVolume m1 = volume_morty1(g, {l.N_plus, l.N_A, l.N});
        const ExactVolume m2 = volume_morty2(g, l.N_A, l.N);
        CHECK(r <= m1);
        CHECK(m1 <= m2);
        CHECK(m1 <= volume_accessible(g, l.N_plus, l.N));
    }
}

TEST_CASE("Morty 2 exceeds Morty 3 by N ln 2 in the dilute limit") {
    const BoxGeometry g(1'000'000, 1'000'000);
    for (int N : {4, 8, 12}) {
        const double diff = log_exact(volume_morty2(g, N / 2, N)) - log_exact(volume_morty3_perceived(g, N / 2, N));
        CHECK(diff == doctest::Approx(N * std::numbers::ln2).epsilon(1e-4));
    }
}

TEST_CASE("Stirling volumes converge in the dilute limit") {
    const RickLabel l{3, 6, 6, 12};
    for (auto o : {Observer::rick, Observer::morty1, Observer::morty2, Observer::morty3}) {
        CAPTURE(to_string(o));
        double previous = 1.0;
        for (int w : {50, 500, 5000, 50000}) {
            const BoxGeometry g(w, w);
            const ExactVolume V = o == Observer::rick     ? volume_rick(g, l)
                                  : o == Observer::morty1 ? volume_morty1(g, {l.N_plus, l.N_A, l.N})
                                  : o == Observer::morty2 ? volume_morty2(g, l.N_A, l.N)
                                                          : volume_morty3_perceived(g, l.N_A, l.N);
            const double exact = log_exact(V);
            const double rel = std::abs(stirling_log_volume(o, g, l) - exact) / exact;
            CHECK(rel < previous);
            previous = rel;
        }
        CHECK(previous < 0.05);
    }
}

TEST_CASE("observer names round-trip") {
    for (auto o : {Observer::rick, Observer::morty1, Observer::morty2, Observer::morty3})
        CHECK(observer_from_string(to_string(o)) == o);
    CHECK_THROWS((void)observer_from_string("summer"));
}
