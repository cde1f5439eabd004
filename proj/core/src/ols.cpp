#include "pcm/error.hpp"
#include "pcm/regress.hpp"

namespace pcm {

namespace {

// Relative pivot threshold below which a direction is treated as rank deficient.
constexpr double kRankThreshold = 1e-10;

}  // namespace

FittedModel fit_ols(const Matrix& design, const Vector& y, bool intercept) {
  if (design.rows() != y.size() || y.size() < 1) {
    throw InvalidArgument("fit_ols: design has " + std::to_string(design.rows()) +
                          " rows but y has " + std::to_string(y.size()));
  }
  const Index p = design.cols();
  if (intercept && detail::is_constant(y)) {
    return detail::constant_model(y(0), p, y.size());
  }

  // With an intercept the slopes are the minimum-norm solution on centred
  // columns, so a constant column gets coefficient 0 and the intercept
  // absorbs the mean.
  Vector means = Vector::Zero(p);
  double y_mean = 0.0;
  if (intercept) {
    means = design.colwise().mean().transpose();
    y_mean = y.mean();
  }

  Vector coef = Vector::Zero(p);
  if (p > 0) {
    const Matrix centred = design.rowwise() - means.transpose();
    const Vector target = y.array() - y_mean;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(kRankThreshold);
    cod.compute(centred);
    coef = cod.solve(target);
  }
  const double b0 = intercept ? y_mean - means.dot(coef) : 0.0;

  auto impl = std::make_shared<detail::LinearImpl>();
  impl->intercept = b0;
  impl->coef = coef;
  Vector fitted = impl->predict(design);
  return FittedModel(std::move(impl), p, std::move(fitted))
      .with_coefficients(std::move(coef), intercept ? std::optional<double>(b0) : std::nullopt);
}

}  // namespace pcm
