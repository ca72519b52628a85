#include <benchmark/benchmark.h>

#include "emwf/bohm.hpp"
#include "emwf/dynamics.hpp"
#include "emwf/effective.hpp"
#include "emwf/moments.hpp"
#include "emwf/states.hpp"
#include "emwf/wigner.hpp"

using namespace emwf;

namespace {

WaveFunction packet_1d(std::size_t n) {
  return gaussian_state(make_grid(1, {40.0}, {n}), {}, {1.0}, {0.5}, {1.0});
}

WaveFunction packet_2d(std::size_t n) {
  return gaussian_state(make_grid(2, {20.0, 20.0}, {n, n}), {}, {1.0, -0.5}, {0.5, 0.2}, {1.0, 0.8});
}

void BM_SplitStep1D(benchmark::State& state) {
  WaveFunction psi = packet_1d(static_cast<std::size_t>(state.range(0)));
  const auto v = quartic_potential(0.1);
  for (auto _ : state) {
    psi = split_step(psi, *v, 1e-3);
    benchmark::DoNotOptimize(psi.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SplitStep1D)->RangeMultiplier(4)->Range(256, 16384);

void BM_SplitStep2D(benchmark::State& state) {
  WaveFunction psi = packet_2d(static_cast<std::size_t>(state.range(0)));
  const auto v = harmonic_potential(1.0);
  for (auto _ : state) {
    psi = split_step(psi, *v, 1e-3);
    benchmark::DoNotOptimize(psi.values().data());
  }
}
BENCHMARK(BM_SplitStep2D)->Arg(64)->Arg(128)->Arg(256);

void BM_CentralMoments(benchmark::State& state) {
  const WaveFunction psi = packet_2d(128);
  const DensityField rho = density(psi);
  const std::vector<double> c = position_expectation(psi);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(central_moments(rho, c, order));
}
BENCHMARK(BM_CentralMoments)->DenseRange(2, 4);

void BM_PairMoments(benchmark::State& state) {
  const WaveFunction psi = packet_1d(1024);
  const std::vector<double> c = position_expectation(psi);
  for (auto _ : state) benchmark::DoNotOptimize(derivative_pair_moments(psi, c, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_PairMoments)->DenseRange(1, 4);

void BM_Wigner1D(benchmark::State& state) {
  const WaveFunction psi = packet_1d(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wigner_transform(psi));
}
BENCHMARK(BM_Wigner1D)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

void BM_Wigner2D(benchmark::State& state) {
  const WaveFunction psi = packet_2d(16);
  const unsigned threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(wigner_transform(psi, threads));
}
BENCHMARK(BM_Wigner2D)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Effective(benchmark::State& state) {
  const WaveFunction psi = packet_1d(512);
  const auto v = quartic_potential(0.1);
  const MultipoleSet m = central_moments(density(psi), position_expectation(psi), 4);
  std::vector<double> times;
  for (int k = 0; k <= 500; ++k) times.push_back(0.01 * k);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_effective({{1.0}, {0.5}, 0.0, order}, *v, {1.0}, frozen_multipoles(m), times));
}
BENCHMARK(BM_Effective)->DenseRange(1, 4);

void BM_BohmBundle(benchmark::State& state) {
  const auto v = harmonic_potential(1.0);
  EvolveOptions opt;
  opt.t_final = 0.5;
  opt.dt = 1e-2;
  const TrajectoryRecord rec = evolve(packet_1d(512), *v, opt);
  const auto seeds = seed_from_density(rec.snapshots.front(), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_bohm_trajectories(rec, seeds));
}
BENCHMARK(BM_BohmBundle)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
