#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pcm {

/// Linear-model quantities entering the asymptotic power of the PCM and GCM.
struct LinearPowerParams {
  double beta = 0.0;
  double sigma_beta = 1.0;
  double sigma_xi_sq = 1.0;
  double sigma_eps_xi = 1.0;
  std::size_t n1 = 100;
  std::size_t n2 = 100;
  double alpha = 0.05;

  /// Throws ConfigError on non-positive scales or sample sizes, or alpha outside (0,1).
  void validate() const;
};

/// Phi(sqrt(n2) b / s_b) Phi(z_a + sqrt(n1) b s_xi^2 / s_exi)
///   + Phi(-sqrt(n2) b / s_b) Phi(z_a - sqrt(n1) b s_xi^2 / s_exi).
double pcm_asymptotic_power(const LinearPowerParams& p);

/// Phi(z_{a/2} + c) + Phi(z_{a/2} - c), c = sqrt(n1 + n2) b s_xi^2 / s_exi.
double gcm_asymptotic_power(const LinearPowerParams& p);

/// One support point of a finite joint distribution of scalar (X, Y, Z).
struct Atom {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double p = 0.0;
};

using DiscreteDistribution = std::vector<Atom>;

/// A candidate projection f(x, z).
using ProjectionTable = std::function<double(double x, double z)>;

/// E[{Y - E(Y|Z)} f(X, Z)], summed exactly over the atoms.
double projected_covariance(const ProjectionTable& f, const DiscreteDistribution& dist);

/// E[{Y - E(Y|Z)} f]^2 / E[{Y - E(Y|X,Z)}^2 f^2], with 0/0 := 0.
double oracle_ratio(const ProjectionTable& f, const DiscreteDistribution& dist);

/// f = h / v with h = E(Y|X,Z) - E(Y|Z) and v = Var(Y|X,Z). Throws
/// InvalidArgument when some (x, z) cell has zero conditional variance.
ProjectionTable optimal_projection(const DiscreteDistribution& dist);

}  // namespace pcm
