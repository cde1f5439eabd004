#include "pcm/baselines.hpp"

#include "pcm/error.hpp"
#include "pcm/normal.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <limits>

namespace pcm {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

// sqrt(n) mean / sd with divisor n; 0 when every entry is equal.
double studentized_mean(const Vector& r) {
  if (r.size() == 0 || detail::is_constant(r)) return 0.0;
  const auto n = static_cast<double>(r.size());
  const double mean = r.mean();
  const double sd = std::sqrt((r.array() - mean).square().sum() / n);
  if (!(sd > 0.0)) return 0.0;
  return std::sqrt(n) * mean / sd;
}

struct HalfPieces {
  double v = 0.0;
  double eta = 0.0;
};

// v^ and the plug-in eta^ for one half, given the fitted regression values.
HalfPieces variance_explained(const Vector& y, const Vector& fitted) {
  const auto n = static_cast<double>(y.size());
  const double mu = y.mean();
  const Vector centred = y.array() - mu;
  const double var_y = centred.squaredNorm() / n;
  if (!(var_y > 0.0)) return {};
  const double mse = (y - fitted).squaredNorm() / n;
  const Vector dev = fitted.array() - mu;
  const double tau = dev.squaredNorm() / n;
  const Vector phi = ((2.0 * (y - fitted).cwiseProduct(dev) + dev.cwiseAbs2()) / var_y).array() -
                     tau * centred.cwiseAbs2().array() / (var_y * var_y);
  return {(var_y - mse) / var_y, phi.squaredNorm() / n};
}

}  // namespace

BaselineResult gcm_test(const Dataset& data, const RegressorSpec& reg_x_on_z,
                        const RegressorSpec& reg_y_on_z, double alpha, const RngStream& seed) {
  check_alpha(alpha);
  if (data.d_x() != 1) {
    throw UnsupportedConfiguration("gcm supports univariate X only (d_X = " +
                                   std::to_string(data.d_x()) + ")");
  }
  if (data.d_z() < 1) throw ConfigError("gcm needs at least one Z column");
  check_sample_size(reg_x_on_z, data.n(), "reg_x");
  check_sample_size(reg_y_on_z, data.n(), "reg_m");
  const Vector x = data.x().col(0);
  const FittedModel fx = fit(reg_x_on_z, data.z(), x, seed.derive(1));
  const FittedModel fy = fit(reg_y_on_z, data.z(), data.y(), seed.derive(2));
  const Vector r = (x - fx.fitted_values()).cwiseProduct(data.y() - fy.fitted_values());

  BaselineResult out;
  out.method = "gcm";
  out.statistic = studentized_mean(r);
  out.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(out.statistic)));
  out.reject = std::abs(out.statistic) > normal_quantile(1.0 - alpha / 2.0);
  return out;
}

WilliamsonComponents williamson_components(const Dataset& data, const IndexSet& i1,
                                           const IndexSet& i2, const RegressorSpec& reg_g,
                                           const RegressorSpec& reg_m, const RngStream& seed) {
  if (i1.empty() || i2.empty()) throw InvalidArgument("williamson: both halves must be nonempty");
  const Dataset d1 = data.subset(i1);
  const Dataset d2 = data.subset(i2);
  const FittedModel g = fit(reg_g, d1.xz(), d1.y(), seed.derive(1));
  const FittedModel m = fit(reg_m, d2.z(), d2.y(), seed.derive(2));
  const HalfPieces a = variance_explained(d1.y(), g.fitted_values());
  const HalfPieces b = variance_explained(d2.y(), m.fitted_values());
  return {a.v, b.v, a.eta, b.eta};
}

double williamson_statistic(const WilliamsonComponents& c, std::size_t n_half) {
  const double num = c.v1 - c.v2;
  const double den = std::sqrt((c.eta1 + c.eta2) / static_cast<double>(n_half));
  if (num == 0.0) return 0.0;
  if (!(den > 0.0)) return num > 0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
  return num / den;
}

BaselineResult williamson_test(const Dataset& data, const RegressorSpec& reg_g,
                               const RegressorSpec& reg_m, double alpha, const RngStream& seed) {
  check_alpha(alpha);
  if (data.n() < 4) throw ConfigError("williamson test needs at least 4 rows");
  if (data.d_z() < 1) throw ConfigError("williamson test needs at least one Z column");
  const SplitPair halves = split(static_cast<std::size_t>(data.n()), seed.derive(0));
  check_sample_size(reg_g, static_cast<Index>(halves.first.size()), "reg_g");
  check_sample_size(reg_m, static_cast<Index>(halves.second.size()), "reg_m");
  const auto c = williamson_components(data, halves.first, halves.second, reg_g, reg_m, seed);

  BaselineResult out;
  out.method = "williamson";
  out.statistic = williamson_statistic(c, halves.second.size());
  out.p_value = std::clamp(normal_sf(out.statistic), 0.0, 1.0);
  out.reject = out.statistic > normal_quantile(1.0 - alpha);
  return out;
}

BaselineResult robust_wald_test(const Dataset& data, double alpha) {
  check_alpha(alpha);
  const Index n = data.n();
  const Index dx = data.d_x();
  const Index p = 1 + dx + data.d_z();
  Matrix design(n, p);
  design << Matrix::Ones(n, 1), data.x(), data.z();

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    throw SingularCovariance("wald: design (1, X, Z) is rank deficient (rank " +
                             std::to_string(qr.rank()) + " of " + std::to_string(p) + ")");
  }
  const Vector beta = qr.solve(data.y());
  const Vector resid = data.y() - design * beta;

  BaselineResult out;
  out.method = "wald";
  if (resid.norm() <= 1e-12 * (1.0 + data.y().norm())) {
    out.statistic = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    out.reject = true;
    return out;
  }

  const Matrix bread = (design.transpose() * design).inverse();
  const Matrix meat = design.transpose() * resid.cwiseAbs2().asDiagonal() * design;
  const Matrix cov = bread * meat * bread;
  const Matrix cov_x = cov.block(1, 1, dx, dx);
  const Vector beta_x = beta.segment(1, dx);

  Eigen::LDLT<Matrix> ldlt(cov_x);
  const double scale = cov_x.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
      ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
    throw SingularCovariance("wald: robust covariance of the X coefficients is singular");
  }
  out.statistic = beta_x.dot(ldlt.solve(beta_x));
  const boost::math::chi_squared chi(static_cast<double>(dx));
  out.p_value = boost::math::cdf(boost::math::complement(chi, out.statistic));
  out.reject = out.statistic > boost::math::quantile(boost::math::complement(chi, alpha));
  return out;
}

}  // namespace pcm
