#include <benchmark/benchmark.h>

#include "pcm/regress.hpp"

#include <cmath>
#include <random>

namespace {

struct Problem {
  pcm::Matrix design;
  pcm::Vector y;
};

Problem make_problem(pcm::Index n, pcm::Index p) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif;
  std::normal_distribution<double> normal;
  Problem out{pcm::Matrix(n, p), pcm::Vector(n)};
  for (pcm::Index i = 0; i < n; ++i) {
    for (pcm::Index j = 0; j < p; ++j) out.design(i, j) = unif(rng);
    out.y(i) = std::sin(6.0 * out.design(i, 0)) + out.design(i, 1) + normal(rng);
  }
  return out;
}

void run(benchmark::State& state, const char* spec) {
  const Problem prob = make_problem(state.range(0), 6);
  const auto parsed = pcm::parse_regressor(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcm::fit(parsed, prob.design, prob.y, pcm::RngStream(1)));
  }
  state.SetComplexityN(state.range(0));
}

void BM_Ols(benchmark::State& state) { run(state, "ols"); }
void BM_Lasso(benchmark::State& state) { run(state, "lasso:0.05"); }
void BM_LassoCv(benchmark::State& state) { run(state, "lasso:cv"); }
void BM_SqrtLasso(benchmark::State& state) { run(state, "sqrtlasso:auto"); }
void BM_AdditiveSpline(benchmark::State& state) { run(state, "spline:r=4,N=8,additive"); }
void BM_Forest(benchmark::State& state) { run(state, "forest:trees=50,leaf=5"); }

}  // namespace

BENCHMARK(BM_Ols)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_Lasso)->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(BM_LassoCv)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SqrtLasso)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(BM_AdditiveSpline)->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(BM_Forest)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
