#include <benchmark/benchmark.h>

#include "hexweb/duality.hpp"
#include "hexweb/generators.hpp"
#include "hexweb/geodesic_flow.hpp"
#include "hexweb/hydro_system.hpp"
#include "hexweb/web3.hpp"

using namespace hexweb;

namespace {

const MetricField& translation() {
  static const MetricField f = make_translation_family({});
  return f;
}

const MetricField& spiral() {
  static const MetricField f = make_spiral_family({});
  return f;
}

void BM_ResidualGrid(benchmark::State& state) {
  const MetricField& f = translation();
  const int n = static_cast<int>(state.range(0));
  const auto grid = f.domain().interior_grid(n, n);
  for (auto _ : state) {
    double worst = 0.0;
    for (const auto& p : grid) {
      const MetricJet2 m = f.jet(p);
      worst = std::max(worst, hydro_residual(m).max_abs() / hydro_residual_scale(m));
    }
    benchmark::DoNotOptimize(worst);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()));
}
BENCHMARK(BM_ResidualGrid)->Arg(20)->Arg(80);

void BM_SpiralConstruction(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(make_spiral_family({}));
}
BENCHMARK(BM_SpiralConstruction)->Unit(benchmark::kMillisecond);

void BM_Calibration(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cubic_integral_from_solution(translation()));
}
BENCHMARK(BM_Calibration)->Unit(benchmark::kMillisecond);

void BM_BlaschkeGrid(benchmark::State& state) {
  const MetricField& f = spiral();
  const Web3Field w = web_from_cubic_integral(f, cubic_integral_from_solution(f));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(max_blaschke_curvature(w, n, n));
}
BENCHMARK(BM_BlaschkeGrid)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Geodesic(benchmark::State& state) {
  const MetricField& f = translation();
  const PhasePoint x0 = sample_phase_points(f, 1, 3).front();
  for (auto _ : state) benchmark::DoNotOptimize(integrate_geodesic(f, x0, 1.0, {}));
}
BENCHMARK(BM_Geodesic)->Unit(benchmark::kMicrosecond);

void BM_WebFromPlanes(benchmark::State& state) {
  for (auto _ : state) {
    const SlopeTriple t = web_from_planes(1, {0.0, 0.0, 1.0, 1.0});
    benchmark::DoNotOptimize(t.at(1.5, 0.7));
  }
}
BENCHMARK(BM_WebFromPlanes);

void BM_DualHexagonality(benchmark::State& state) {
  const SlopeTriple t = web_from_planes(1, {0.0, 0.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(max_hexagonality_residual(t, 10));
}
BENCHMARK(BM_DualHexagonality)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
