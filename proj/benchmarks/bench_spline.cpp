#include <benchmark/benchmark.h>

#include "pcm/spline.hpp"

#include <cmath>
#include <random>

namespace {

pcm::Matrix uniform_points(pcm::Index n, pcm::Index d) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif;
  pcm::Matrix m(n, d);
  for (pcm::Index i = 0; i < n; ++i) {
    for (pcm::Index j = 0; j < d; ++j) m(i, j) = unif(rng);
  }
  return m;
}

pcm::TensorBasis cube_basis(int order, int knots, pcm::Index d) {
  return pcm::TensorBasis(std::vector<pcm::BSplineBasis>(static_cast<std::size_t>(d),
                                                         pcm::BSplineBasis(order, knots)));
}

void BM_BasisEval(benchmark::State& state) {
  const auto d = static_cast<pcm::Index>(state.range(0));
  const pcm::TensorBasis tb = cube_basis(4, 6, d);
  const pcm::Vector p = pcm::Vector::Constant(d, 0.37);
  for (auto _ : state) benchmark::DoNotOptimize(tb.evaluate(p));
}

void BM_Design(benchmark::State& state) {
  const pcm::Matrix pts = uniform_points(state.range(0), 2);
  const pcm::TensorBasis tb = cube_basis(4, 6, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tb.design(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Regress(benchmark::State& state) {
  const pcm::Matrix pts = uniform_points(state.range(0), 2);
  const pcm::TensorBasis tb = cube_basis(4, 6, 2);
  pcm::Vector y(pts.rows());
  for (pcm::Index i = 0; i < pts.rows(); ++i) y(i) = std::sin(6.0 * pts(i, 0)) * pts(i, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pcm::spline_regress(pts, y, tb));
}

void BM_ProjectionPi(benchmark::State& state) {
  const auto k = static_cast<pcm::Index>(state.range(0));
  const pcm::Vector beta = pcm::Vector::LinSpaced(k * k, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(pcm::projection_pi(beta, k, k));
}

}  // namespace

BENCHMARK(BM_BasisEval)->DenseRange(1, 4);
BENCHMARK(BM_Design)->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(BM_Regress)->RangeMultiplier(4)->Range(256, 16384);
BENCHMARK(BM_ProjectionPi)->Arg(4)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
