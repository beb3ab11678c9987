// Serial reference vs OpenMP path for each parallel kernel. Arg 0 = serial,
// 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "peqrng/bell.hpp"
#include "peqrng/bits.hpp"
#include "peqrng/certify.hpp"
#include "peqrng/chip.hpp"
#include "peqrng/events.hpp"
#include "peqrng/optimize.hpp"

using namespace peqrng;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(0) ? "openmp" : "serial"); }

void BM_broadband_probabilities(benchmark::State& st) {
  auto cfg = chip::ChipConfig::characterized();
  cfg.spectrum = components::WavelengthSpectrum::gaussian(700, 760, 401, 20);
  const auto r = chip::RotationSetting::from_angles(0.3, -0.7, {0.01, 0.02, 0, -0.01}, {0.07, 0.2, 0.04, 0.2});
  for (auto _ : st) benchmark::DoNotOptimize(chip::broadband_probabilities(cfg, r, exec_of(st)));
  label(st);
}

void BM_simulate_correlation_grid(benchmark::State& st) {
  const auto cfg = chip::ChipConfig::characterized();
  const auto phis = bell::angle_range(-2, 2, 0.05), thetas = bell::angle_range(-2, 0, 0.05);
  for (auto _ : st)
    benchmark::DoNotOptimize(bell::simulate_correlation_grid(cfg, phis, thetas, {}, {}, exec_of(st)));
  label(st);
}

void BM_best_combination_search(benchmark::State& st) {
  const auto phis = bell::angle_range(-2, 2, 0.1), thetas = bell::angle_range(-2, 0, 0.1);
  bell::CorrelationGrid g(phis, thetas);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) g.at(i, j) = bell::theoretical_E_nonideal(phis[i], thetas[j]);
  for (auto _ : st) benchmark::DoNotOptimize(bell::best_combination_search(g, exec_of(st)));
  label(st);
}

void BM_simulate_streams(benchmark::State& st) {
  const std::vector<chip::OutcomeDistribution> d(8, chip::OutcomeDistribution{{0.4, 0.1, 0.1, 0.4}});
  for (auto _ : st) benchmark::DoNotOptimize(events::simulate_streams(d, 120000, 1.0, 1.0, 7, exec_of(st)));
  label(st);
}

void BM_toeplitz_extract(benchmark::State& st) {
  std::mt19937_64 rng(1);
  events::BitString x(200000);
  for (std::size_t i = 0; i < x.size(); ++i) x.set(i, rng() & 1);
  for (auto _ : st) benchmark::DoNotOptimize(events::toeplitz_extract(x, 0.33, 0x1p-32, 5, exec_of(st)));
  label(st);
}

void BM_maximize_e_p(benchmark::State& st) {
  const auto e = certify::PhaseErrorSet::table1_chi_plus();
  const auto mmis = chip::MziMmis::uniform(chip::MmiParams::from_power(0.4, 0.6));
  optimize::MultiStartOptions o;
  o.min_starts = 32;
  o.max_starts = 32;
  o.verification_probes = 10000;
  for (auto _ : st) benchmark::DoNotOptimize(certify::e_p(e, mmis, o, exec_of(st)));
  label(st);
}

}  // namespace

BENCHMARK(BM_broadband_probabilities)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_simulate_correlation_grid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_best_combination_search)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_simulate_streams)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_toeplitz_extract)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_maximize_e_p)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
