#include <doctest.h>

#include "pcm/core.hpp"
#include "pcm/error.hpp"
#include "pcm/normal.hpp"
#include "pcm/power.hpp"

#include <cmath>
#include <random>

using namespace pcm;

namespace {

LinearPowerParams unit(double beta, std::size_t n1, std::size_t n2) {
  LinearPowerParams p;
  p.beta = beta;
  p.n1 = n1;
  p.n2 = n2;
  return p;
}

// Two (x, z) cells per z value, two y values per cell.
DiscreteDistribution four_cells() {
  return {
      {0.0, 1.0, 0.0, 0.10}, {0.0, -0.5, 0.0, 0.15}, {1.0, 2.0, 0.0, 0.05}, {1.0, 0.0, 0.0, 0.20},
      {0.0, 0.3, 1.0, 0.12}, {0.0, 1.5, 1.0, 0.08}, {1.0, -1.0, 1.0, 0.18}, {1.0, 0.4, 1.0, 0.12},
  };
}

}  // namespace

TEST_CASE("pcm power at beta = 0 is alpha exactly") {
  for (double alpha : {0.01, 0.05, 0.1, 0.3}) {
    LinearPowerParams p = unit(0.0, 137, 90);
    p.alpha = alpha;
    CHECK(pcm_asymptotic_power(p) == alpha);
    CHECK(gcm_asymptotic_power(p) == doctest::Approx(alpha).epsilon(1e-14));
  }
}

TEST_CASE("pcm power with unit nuisances") {
  const LinearPowerParams p = unit(1.0, 100, 100);
  const double z = normal_quantile(0.05);
  const double expected =
      normal_cdf(10.0) * normal_cdf(z + 10.0) + normal_cdf(-10.0) * normal_cdf(z - 10.0);
  CHECK(pcm_asymptotic_power(p) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(pcm_asymptotic_power(p) > 1.0 - 1e-12);
}

TEST_CASE("power limits and continuity") {
  CHECK(pcm_asymptotic_power(unit(1e6, 50, 50)) == 1.0);
  CHECK(pcm_asymptotic_power(unit(-1e6, 50, 50)) == 1.0);
  const double base = pcm_asymptotic_power(unit(0.0, 200, 200));
  CHECK(std::abs(pcm_asymptotic_power(unit(1e-9, 200, 200)) - base) < 1e-6);
  for (double b : {0.05, 0.1, 0.2, -0.3, 1.0}) {
    CHECK(pcm_asymptotic_power(unit(b, 200, 200)) > 0.05);
  }
}

TEST_CASE("gcm power") {
  const LinearPowerParams p = unit(0.2, 200, 200);
  const double z = normal_quantile(0.025);
  const double expected = normal_cdf(z + 4.0) + normal_cdf(z - 4.0);
  CHECK(gcm_asymptotic_power(p) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(gcm_asymptotic_power(unit(-0.2, 200, 200)) == gcm_asymptotic_power(p));
  for (double b : {0.05, 0.1, 0.2, 0.3, 0.5}) {
    CHECK(gcm_asymptotic_power(unit(b, 200, 200)) >= pcm_asymptotic_power(unit(b, 200, 200)));
  }
}

TEST_CASE("balanced splits beat lopsided ones") {
  for (double b : {0.3, 0.5, 1.0}) {
    CAPTURE(b);
    const double balanced = pcm_asymptotic_power(unit(b, 100, 100));
    const double lopsided = pcm_asymptotic_power(unit(b, 190, 10));
    CHECK(balanced > lopsided);
  }
}

TEST_CASE("parameter validation") {
  LinearPowerParams p = unit(0.1, 10, 10);
  p.sigma_beta = 0.0;
  CHECK_THROWS_AS(pcm_asymptotic_power(p), ConfigError);
  p = unit(0.1, 0, 10);
  CHECK_THROWS_AS(gcm_asymptotic_power(p), ConfigError);
  p = unit(0.1, 10, 10);
  p.alpha = 1.0;
  CHECK_THROWS_AS(pcm_asymptotic_power(p), ConfigError);
}

TEST_CASE("oracle ratio basics") {
  const auto dist = four_cells();
  CHECK(oracle_ratio([](double, double) { return 0.0; }, dist) == 0.0);
  const ProjectionTable f = [](double x, double z) { return x - 0.3 * z + 0.1; };
  const double r = oracle_ratio(f, dist);
  const ProjectionTable f2 = [&](double x, double z) { return 2.0 * f(x, z); };
  CHECK(oracle_ratio(f2, dist) == doctest::Approx(r).epsilon(1e-14));
  CHECK_THROWS_AS(oracle_ratio(f, {}), InvalidArgument);
}

TEST_CASE("h over v maximises the oracle ratio") {
  const auto dist = four_cells();
  const ProjectionTable best = optimal_projection(dist);
  const double top = oracle_ratio(best, dist);
  CHECK(top > 0.0);
  auto rng = RngStream(12).engine();
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 1000; ++trial) {
    double g[2][2];
    for (auto& row : g) {
      for (auto& v : row) v = normal(rng);
    }
    const double eps = std::pow(10.0, -3.0 + 3.0 * (trial % 4) / 3.0);
    const ProjectionTable f = [&](double x, double z) {
      return best(x, z) + eps * g[static_cast<int>(x)][static_cast<int>(z)];
    };
    CHECK(oracle_ratio(f, dist) <= top + 1e-12);
  }
  const ProjectionTable scaled = [&](double x, double z) { return 3.5 * best(x, z); };
  CHECK(std::abs(oracle_ratio(scaled, dist) - top) <= 1e-12);

  DiscreteDistribution flat = dist;
  flat[1].y = flat[0].y;
  CHECK_THROWS_AS(optimal_projection(flat), InvalidArgument);
}
