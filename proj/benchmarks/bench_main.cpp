#include <benchmark/benchmark.h>

#include <vector>

#include "roughflow/evolve.hpp"
#include "roughflow/field.hpp"
#include "roughflow/fpe.hpp"
#include "roughflow/philox.hpp"
#include "roughflow/singular_drift.hpp"

namespace {

using namespace roughflow;

void BM_philox_block(benchmark::State& state) {
  const rng::NoiseSource source(42);
  std::uint64_t particle = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(source.block(particle++, 17, 0, rng::StreamClass::evolve_noise));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_philox_block);

void BM_gaussian_pair(benchmark::State& state) {
  const rng::NoiseSource source(42);
  std::uint64_t particle = 0;
  double z0 = 0.0;
  double z1 = 0.0;
  for (auto _ : state) {
    source.gaussian_pair(particle++, 17, 0, rng::StreamClass::evolve_noise, z0, z1);
    benchmark::DoNotOptimize(z0);
    benchmark::DoNotOptimize(z1);
  }
  state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_gaussian_pair);

void BM_singular_drift(benchmark::State& state) {
  fields::CounterexampleParams params;
  double x[3] = {0.02, -0.015, 0.04};
  double b[3];
  int flip = 1;
  for (auto _ : state) {
    x[2] = flip * 0.04;  // alternate branches above and below the locus
    flip = -flip;
    fields::counterexample_drift(params, x, b);
    benchmark::DoNotOptimize(b[0]);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_singular_drift);

void BM_fpe_step(benchmark::State& state) {
  const auto n = state.range(0);
  fpe::GridSpec grid;
  grid.d = 2;
  grid.half_width = 2.0;
  grid.spacing = 4.0 / static_cast<double>(n);
  grid.horizon = 1.0;
  const auto field = fields::rotation_field(2, 1.0);
  fpe::FvScheme scheme(field, grid);
  scheme.prepare(0.0);
  const double dt = scheme.resolve_dt(0.0);

  auto u = fpe::gaussian_density(grid, 0.5);
  std::vector<double> in = u.values;
  std::vector<double> out(in.size());
  for (auto _ : state) {
    scheme.fpe_step(in, out, dt, 1);
    std::swap(in, out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.size()));
}
BENCHMARK(BM_fpe_step)->Arg(40)->Arg(80)->Arg(160);

void BM_evolve_ensemble(benchmark::State& state) {
  const auto count = state.range(0);
  const auto field = fields::ou_linear_field(2, 1.0, 1.0);
  const auto start = particles::delta_ensemble({0.1, 0.2, 0.0}, 2, count, 9);
  particles::EvolveOptions opts;
  opts.dt = 1e-3;
  opts.horizon = 0.1;
  for (auto _ : state) {
    auto result = particles::evolve(start, field, opts);
    benchmark::DoNotOptimize(result.ensemble.positions.data());
  }
  state.SetItemsProcessed(state.iterations() * count * 100);
}
BENCHMARK(BM_evolve_ensemble)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
