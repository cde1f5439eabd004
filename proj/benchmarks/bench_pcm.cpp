#include <benchmark/benchmark.h>

#include "pcm/baselines.hpp"
#include "pcm/pcm.hpp"
#include "pcm/sim.hpp"

namespace {

pcm::Dataset linear_null(std::size_t n) {
  return pcm::generate(pcm::find_scenario("null-6.1-linear"), n, pcm::RngStream(3));
}

void BM_PcmSingleOls(benchmark::State& state) {
  const pcm::Dataset data = linear_null(static_cast<std::size_t>(state.range(0)));
  pcm::PcmConfig config;
  config.B = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pcm::pcm_multi(data, config));
}

void BM_PcmMultiOls(benchmark::State& state) {
  const pcm::Dataset data = linear_null(static_cast<std::size_t>(state.range(0)));
  pcm::PcmConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(pcm::pcm_multi(data, config));
}

void BM_PcmAdditiveSplines(benchmark::State& state) {
  const pcm::Scenario s = pcm::find_scenario("null-6.1");
  const pcm::Dataset data = pcm::generate(s, static_cast<std::size_t>(state.range(0)), pcm::RngStream(4));
  pcm::PcmConfig config = pcm::default_method("pcm", s).pcm;
  for (auto _ : state) benchmark::DoNotOptimize(pcm::pcm_multi(data, config));
}

void BM_SplinePcm(benchmark::State& state) {
  const pcm::Dataset full = linear_null(static_cast<std::size_t>(state.range(0)));
  const pcm::Dataset data(full.x(), full.y(), full.z().leftCols(1));
  for (auto _ : state) benchmark::DoNotOptimize(pcm::spline_pcm(data, {}));
}

void BM_Gcm(benchmark::State& state) {
  const pcm::Dataset data = linear_null(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcm::gcm_test(data, pcm::OlsSpec{}, pcm::OlsSpec{}, 0.05, pcm::RngStream()));
  }
}

}  // namespace

BENCHMARK(BM_PcmSingleOls)->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(BM_PcmMultiOls)->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(BM_PcmAdditiveSplines)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SplinePcm)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gcm)->RangeMultiplier(4)->Range(256, 16384);

BENCHMARK_MAIN();
