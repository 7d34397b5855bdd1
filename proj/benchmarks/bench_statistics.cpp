#include "hdmean/harness.hpp"
#include "hdmean/models.hpp"
#include "hdmean/statistics.hpp"

#include <benchmark/benchmark.h>

using namespace hdmean;

namespace {

SampleMatrix null_sample(const ModelRealization& real, std::size_t n) {
  RngStream s(mix64(1), 0);
  return gen_one_sample(real, ErrorDist::StdNormal, n, NullSignal{}, s);
}

void BM_TSr(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const SampleMatrix x = null_sample(realize_model({CovModel::M2, p, 1}), 120);
  for (auto _ : state) benchmark::DoNotOptimize(t_sr(x).statistic);
}
BENCHMARK(BM_TSr)->Arg(100)->Arg(200)->Arg(400);

void BM_MaxStatOmegaRoot(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const ModelRealization real = realize_model({CovModel::M2, p, 1});
  const SampleMatrix x = null_sample(real, 120);
  for (auto _ : state) benchmark::DoNotOptimize(max_stat(x, real.omega_sqrt).statistic);
}
BENCHMARK(BM_MaxStatOmegaRoot)->Arg(100)->Arg(200)->Arg(400);

void BM_TSkk(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const ModelRealization real = realize_model({CovModel::M1, p, 1});
  RngStream s(mix64(2), 0);
  const auto [x1, x2] = gen_two_sample(real, ErrorDist::StdNormal, 60, 60, NullSignal{}, s);
  for (auto _ : state) benchmark::DoNotOptimize(t_skk(x1, x2).statistic);
}
BENCHMARK(BM_TSkk)->Arg(100)->Arg(200);

void BM_Hc2FromTValues(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  std::vector<double> t(p);
  RngStream s(mix64(3), 0);
  for (double& v : t) v = draw_error(ErrorDist::StdNormal, s);
  const std::vector<double> grid = default_hc_grid();
  for (auto _ : state) benchmark::DoNotOptimize(hc2_from_tvalues(t, grid));
}
BENCHMARK(BM_Hc2FromTValues)->Arg(100)->Arg(200);

void BM_RealizeModel(benchmark::State& state) {
  const auto model = static_cast<CovModel>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(realize_model({model, 200, 7}).sigma.dim());
}
BENCHMARK(BM_RealizeModel)->DenseRange(1, 8)->Unit(benchmark::kMillisecond);

void BM_Eigh(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const SymMatrix m = realize_model({CovModel::M2, p, 1}).sigma;
  for (auto _ : state) benchmark::DoNotOptimize(eigh(m).values(0));
}
BENCHMARK(BM_Eigh)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SizeReplication(benchmark::State& state) {
  SimConfig c;
  c.p = 200;
  c.reps = 20;
  c.methods = {Method::SR, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC};
  for (auto _ : state) benchmark::DoNotOptimize(run_size(c).rates.size());
}
BENCHMARK(BM_SizeReplication)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
