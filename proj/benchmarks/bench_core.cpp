#include <cmath>

#include <benchmark/benchmark.h>

#include "obsmix/combinatorics.hpp"
#include "obsmix/lattice.hpp"
#include "obsmix/lift.hpp"
#include "obsmix/thermo.hpp"

namespace {

namespace cb = obsmix::combinatorics;
namespace la = obsmix::lattice;

la::LatticeSpec symmetric(int L) {
    la::LatticeSpec s;
    s.L_A = L / 2;
    s.L_B = L - L / 2;
    s.N_plus = 2;
    s.N_minus = 2;
    return s;
}

void BM_Morty2Volume(benchmark::State &state) {
    const int N = static_cast<int>(state.range(0));
    const cb::BoxGeometry g(100 * N, 100 * N);
    for (auto _ : state) benchmark::DoNotOptimize(cb::log_exact(cb::volume_morty2(g, N / 2, N)));
}
BENCHMARK(BM_Morty2Volume)->RangeMultiplier(2)->Range(4, 64);

void BM_BuildHamiltonian(benchmark::State &state) {
    const auto spec = symmetric(static_cast<int>(state.range(0)));
    const auto basis = la::Basis::build(spec);
    for (auto _ : state) benchmark::DoNotOptimize(la::build_hamiltonian(spec, basis));
    state.counters["dim"] = static_cast<double>(basis.size());
}
BENCHMARK(BM_BuildHamiltonian)->DenseRange(6, 14, 2)->Unit(benchmark::kMillisecond);

void BM_DenseSpectrum(benchmark::State &state) {
    const auto spec = symmetric(static_cast<int>(state.range(0)));
    const auto H = la::build_hamiltonian(spec, la::Basis::build(spec));
    for (auto _ : state) benchmark::DoNotOptimize(la::eigenvalues(H));
    state.counters["dim"] = static_cast<double>(H.rows());
}
BENCHMARK(BM_DenseSpectrum)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

void BM_KrylovStep(benchmark::State &state) {
    const auto spec = symmetric(static_cast<int>(state.range(0)));
    const auto basis = la::Basis::build(spec);
    const auto H = la::build_hamiltonian(spec, basis);
    const auto psi = la::initial_state(spec, basis, la::InitialMode::haar, 1);
    const std::vector<double> times{0.0, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(la::evolve_krylov(H, psi, times, 1e-10));
    state.counters["dim"] = static_cast<double>(H.rows());
}
BENCHMARK(BM_KrylovStep)->DenseRange(10, 16, 2)->Unit(benchmark::kMillisecond);

void BM_SolveBeta(benchmark::State &state) {
    const auto spectrum = la::block_spectrum(symmetric(10));
    const double target = std::log(static_cast<double>(spectrum.dimension())) - 2.0;
    for (auto _ : state) benchmark::DoNotOptimize(obsmix::thermo::solve_beta_for_entropy(spectrum, target));
}
BENCHMARK(BM_SolveBeta);

void BM_LemmaOverlap(benchmark::State &state) {
    for (auto _ : state) benchmark::DoNotOptimize(obsmix::lift::verify_lemma_overlap(20, 1e-10, 1));
}
BENCHMARK(BM_LemmaOverlap)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
