#pragma once

#include "pcm/core.hpp"
#include "pcm/regress.hpp"

#include <string>

namespace pcm {

struct BaselineResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::string method;
};

/// Generalised covariance measure: sqrt(n) mean(R) / sd(R) for the products R
/// of the X-on-Z and Y-on-Z residuals (sd with divisor n), two-sided p-value.
/// Throws UnsupportedConfiguration unless d_X = 1.
BaselineResult gcm_test(const Dataset& data, const RegressorSpec& reg_x_on_z,
                        const RegressorSpec& reg_y_on_z, double alpha, const RngStream& seed);

/// Pieces of the variance-explained comparison on one split.
struct WilliamsonComponents {
  /// 1 - MSE(g^) / Var(Y) on the first half, g^ fitted there.
  double v1 = 0.0;
  /// 1 - MSE(m^) / Var(Y) on the second half, m^ fitted there.
  double v2 = 0.0;
  /// Plug-in second moments of the influence functions.
  double eta1 = 0.0;
  double eta2 = 0.0;
};

WilliamsonComponents williamson_components(const Dataset& data, const IndexSet& i1,
                                           const IndexSet& i2, const RegressorSpec& reg_g,
                                           const RegressorSpec& reg_m, const RngStream& seed);

/// (v1 - v2) / sqrt((eta1 + eta2) / n) with n the half-sample size; 0/0 := 0.
double williamson_statistic(const WilliamsonComponents& c, std::size_t n_half);

/// Sample-splitting test comparing variance explained by g^ and m^; rejects
/// when the statistic exceeds z_{1-alpha}. Requires n >= 4.
BaselineResult williamson_test(const Dataset& data, const RegressorSpec& reg_g,
                               const RegressorSpec& reg_m, double alpha, const RngStream& seed);

/// Wald test of the X coefficients in the OLS fit of Y on (1, X, Z) with the
/// HC0 sandwich covariance, referred to chi-square with d_X degrees of freedom.
/// Throws SingularCovariance when the design or the X-block covariance is
/// rank deficient; an exact fit gives statistic +inf and p-value 0.
BaselineResult robust_wald_test(const Dataset& data, double alpha);

}  // namespace pcm
