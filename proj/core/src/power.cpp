#include "pcm/power.hpp"

#include "pcm/error.hpp"
#include "pcm/normal.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace pcm {

namespace {

// Phi(Phi^{-1}(level) + shift); the unshifted case returns `level` itself
// rather than a quantile/cdf round trip.
double shifted_level(double level, double shift) {
  if (shift == 0.0) return level;
  return normal_cdf(normal_quantile(level) + shift);
}

struct Moments {
  double mass = 0.0;
  double sum_y = 0.0;
  double sum_y2 = 0.0;

  double mean() const { return sum_y / mass; }
  double variance() const {
    const double m = mean();
    return sum_y2 / mass - m * m;
  }
};

void check_dist(const DiscreteDistribution& dist) {
  if (dist.empty()) throw InvalidArgument("discrete distribution has no atoms");
  for (const auto& a : dist) {
    if (!(a.p > 0.0) || !std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.z)) {
      throw InvalidArgument("atoms need positive mass and finite coordinates");
    }
  }
}

std::map<double, Moments> by_z(const DiscreteDistribution& dist) {
  std::map<double, Moments> out;
  for (const auto& a : dist) {
    auto& m = out[a.z];
    m.mass += a.p;
    m.sum_y += a.p * a.y;
  }
  return out;
}

std::map<std::pair<double, double>, Moments> by_xz(const DiscreteDistribution& dist) {
  std::map<std::pair<double, double>, Moments> out;
  for (const auto& a : dist) {
    auto& m = out[{a.x, a.z}];
    m.mass += a.p;
    m.sum_y += a.p * a.y;
    m.sum_y2 += a.p * a.y * a.y;
  }
  return out;
}

}  // namespace

void LinearPowerParams::validate() const {
  if (!(sigma_beta > 0 && sigma_xi_sq > 0 && sigma_eps_xi > 0)) {
    throw ConfigError("sigma_beta, sigma_xi_sq and sigma_eps_xi must be positive");
  }
  if (n1 < 1 || n2 < 1) throw ConfigError("n1 and n2 must be positive");
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
  if (!std::isfinite(beta)) throw ConfigError("beta must be finite");
}

double pcm_asymptotic_power(const LinearPowerParams& p) {
  p.validate();
  const double sign_arg = std::sqrt(static_cast<double>(p.n2)) * p.beta / p.sigma_beta;
  const double shift =
      std::sqrt(static_cast<double>(p.n1)) * p.beta * p.sigma_xi_sq / p.sigma_eps_xi;
  return normal_cdf(sign_arg) * shifted_level(p.alpha, shift) +
         normal_cdf(-sign_arg) * shifted_level(p.alpha, -shift);
}

double gcm_asymptotic_power(const LinearPowerParams& p) {
  p.validate();
  const double shift = std::sqrt(static_cast<double>(p.n1 + p.n2)) * p.beta * p.sigma_xi_sq /
                       p.sigma_eps_xi;
  return shifted_level(p.alpha / 2.0, shift) + shifted_level(p.alpha / 2.0, -shift);
}

double projected_covariance(const ProjectionTable& f, const DiscreteDistribution& dist) {
  check_dist(dist);
  const auto z_moments = by_z(dist);
  double total = 0.0;
  for (const auto& a : dist) {
    total += a.p * (a.y - z_moments.at(a.z).mean()) * f(a.x, a.z);
  }
  return total;
}

double oracle_ratio(const ProjectionTable& f, const DiscreteDistribution& dist) {
  check_dist(dist);
  const auto xz_moments = by_xz(dist);
  const double num = projected_covariance(f, dist);
  double den = 0.0;
  for (const auto& a : dist) {
    const double r = a.y - xz_moments.at({a.x, a.z}).mean();
    const double fv = f(a.x, a.z);
    den += a.p * r * r * fv * fv;
  }
  if (den == 0.0) {
    if (num != 0.0) {
      throw Error("oracle_ratio: zero denominator with nonzero numerator (impossible when "
                  "every (x, z) cell has positive conditional variance)");
    }
    return 0.0;
  }
  return num * num / den;
}

ProjectionTable optimal_projection(const DiscreteDistribution& dist) {
  check_dist(dist);
  const auto z_moments = by_z(dist);
  auto xz_moments = by_xz(dist);
  std::map<std::pair<double, double>, double> table;
  for (const auto& [key, m] : xz_moments) {
    const double v = m.variance();
    if (!(v > 0.0)) {
      throw InvalidArgument("optimal_projection: zero conditional variance at an (x, z) atom");
    }
    table[key] = (m.mean() - z_moments.at(key.second).mean()) / v;
  }
  return [table = std::move(table)](double x, double z) {
    const auto it = table.find({x, z});
    return it == table.end() ? 0.0 : it->second;
  };
}

}  // namespace pcm
