#include "pcm/error.hpp"
#include "pcm/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcm {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kCoefTolerance = 1e-8;
constexpr int kCvFolds = 5;
constexpr int kCvGridSize = 50;
constexpr double kCvGridRatio = 1e-3;

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Minimises (1/2n)||y - X b||^2 + sum_j penalty_j |b_j| by cyclic coordinate
// descent, updating b and the residual y - X b in place. Columns with zero
// norm are left at 0. Returns the number of sweeps performed.
int coordinate_descent(const Matrix& x, const Vector& penalty, Vector& b, Vector& resid,
                       double tol, bool& converged) {
  const auto n = static_cast<double>(x.rows());
  const Vector col_sq = x.colwise().squaredNorm().transpose() / n;
  int sweep = 0;
  converged = false;
  while (sweep < kMaxSweeps) {
    ++sweep;
    double max_change = 0.0;
    for (Index j = 0; j < x.cols(); ++j) {
      if (col_sq(j) <= 0.0) continue;
      const double old = b(j);
      const double rho = x.col(j).dot(resid) / n + col_sq(j) * old;
      const double updated = soft_threshold(rho, penalty(j)) / col_sq(j);
      if (updated != old) {
        resid.noalias() -= (updated - old) * x.col(j);
        b(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (max_change < tol) {
      converged = true;
      break;
    }
  }
  return sweep;
}

struct Standardized {
  Vector mean;
  Vector scale;  // population sd; 0 marks a constant column
  Matrix x;
  double y_mean = 0.0;
  // Population sd of y. Penalties act on y / y_scale, which makes a fixed
  // lambda give fitted values that scale with y.
  double y_scale = 1.0;
  Vector y;
};

Standardized standardize(const Matrix& design, const Vector& y) {
  Standardized s;
  const auto n = static_cast<double>(design.rows());
  s.mean = design.colwise().mean().transpose();
  s.x = design.rowwise() - s.mean.transpose();
  s.scale = (s.x.colwise().squaredNorm().transpose() / n).cwiseSqrt();
  for (Index j = 0; j < s.x.cols(); ++j) {
    if (s.scale(j) > 0) {
      s.x.col(j) /= s.scale(j);
    } else {
      s.x.col(j).setZero();
    }
  }
  s.y_mean = y.mean();
  s.y = y.array() - s.y_mean;
  const double y_sd = std::sqrt(s.y.squaredNorm() / n);
  if (y_sd > 0.0) {
    s.y_scale = y_sd;
    s.y /= y_sd;
  }
  return s;
}

Vector penalty_vector(Index p, double lambda, const IndexSet& unpenalized) {
  Vector pen = Vector::Constant(p, lambda);
  for (auto j : unpenalized) {
    if (static_cast<Index>(j) >= p) {
      throw InvalidArgument("lasso: unpenalized column " + std::to_string(j) + " out of range");
    }
    pen(static_cast<Index>(j)) = 0.0;
  }
  return pen;
}

// Standardized-scale solutions along a decreasing lambda grid (warm started).
std::vector<Vector> lasso_path(const Standardized& s, const std::vector<double>& lambdas,
                               const IndexSet& unpenalized) {
  std::vector<Vector> out;
  Vector b = Vector::Zero(s.x.cols());
  Vector resid = s.y;
  for (double lambda : lambdas) {
    bool converged = false;
    coordinate_descent(s.x, penalty_vector(s.x.cols(), lambda, unpenalized), b, resid,
                       kCoefTolerance, converged);
    out.push_back(b);
  }
  return out;
}

FittedModel linear_model(const Matrix& design, double intercept, Vector coef) {
  auto impl = std::make_shared<detail::LinearImpl>();
  impl->intercept = intercept;
  impl->coef = coef;
  Vector fitted = impl->predict(design);
  return FittedModel(std::move(impl), design.cols(), std::move(fitted))
      .with_coefficients(std::move(coef), intercept);
}

// Maps standardized-scale slopes back to original units.
std::pair<double, Vector> unstandardize(const Standardized& s, const Vector& b) {
  Vector coef = Vector::Zero(b.size());
  for (Index j = 0; j < b.size(); ++j) {
    if (s.scale(j) > 0) coef(j) = s.y_scale * b(j) / s.scale(j);
  }
  return {s.y_mean - s.mean.dot(coef), coef};
}

}  // namespace

FittedModel fit_lasso(const Matrix& design, const Vector& y, double lambda,
                      const IndexSet& unpenalized) {
  if (!(lambda >= 0.0)) throw InvalidArgument("fit_lasso: lambda must be >= 0");
  if (design.rows() != y.size() || y.size() < 1) {
    throw InvalidArgument("fit_lasso: design and y disagree in length");
  }
  if (detail::is_constant(y)) return detail::constant_model(y(0), design.cols(), y.size());

  const Standardized s = standardize(design, y);
  Vector b = Vector::Zero(s.x.cols());
  Vector resid = s.y;
  bool converged = false;
  const int sweeps = coordinate_descent(s.x, penalty_vector(s.x.cols(), lambda, unpenalized), b,
                                        resid, kCoefTolerance, converged);
  auto [b0, coef] = unstandardize(s, b);
  FitDiagnostics diag;
  diag.iterations = sweeps;
  diag.converged = converged;
  diag.lambda = lambda;
  return linear_model(design, b0, std::move(coef)).with_diagnostics(diag);
}

FittedModel fit_lasso_cv(const Matrix& design, const Vector& y, const IndexSet& unpenalized,
                         const RngStream& stream) {
  if (design.rows() != y.size()) throw InvalidArgument("fit_lasso_cv: length mismatch");
  const Index n = y.size();
  if (n < 2 * kCvFolds) throw InvalidArgument("fit_lasso_cv needs at least 10 rows");
  if (detail::is_constant(y)) return detail::constant_model(y(0), design.cols(), n);

  const Standardized full = standardize(design, y);
  Vector pen_mask = penalty_vector(design.cols(), 1.0, unpenalized);

  // Fit the unpenalized columns first so lambda_max is measured on the part
  // of y they leave unexplained.
  Vector b = Vector::Zero(full.x.cols());
  Vector resid = full.y;
  bool converged = false;
  Vector inf_pen = pen_mask * std::numeric_limits<double>::max();
  coordinate_descent(full.x, inf_pen, b, resid, kCoefTolerance, converged);
  double lambda_max = 0.0;
  for (Index j = 0; j < full.x.cols(); ++j) {
    if (pen_mask(j) > 0) {
      lambda_max = std::max(lambda_max, std::abs(full.x.col(j).dot(resid)) / static_cast<double>(n));
    }
  }
  if (lambda_max <= 0.0) {
    auto model = fit_lasso(design, y, 0.0, unpenalized);
    return model;
  }

  std::vector<double> grid(kCvGridSize);
  for (int k = 0; k < kCvGridSize; ++k) {
    grid[static_cast<std::size_t>(k)] =
        lambda_max * std::pow(kCvGridRatio, static_cast<double>(k) / (kCvGridSize - 1));
  }

  const auto folds = partition(static_cast<std::size_t>(n), kCvFolds, stream);
  std::vector<double> cv_error(grid.size(), 0.0);
  for (const auto& held : folds) {
    std::vector<bool> is_held(static_cast<std::size_t>(n), false);
    for (auto i : held) is_held[i] = true;
    IndexSet train;
    for (Index i = 0; i < n; ++i) {
      if (!is_held[static_cast<std::size_t>(i)]) train.push_back(static_cast<std::size_t>(i));
    }
    Matrix xt(static_cast<Index>(train.size()), design.cols());
    Vector yt(static_cast<Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      xt.row(static_cast<Index>(r)) = design.row(static_cast<Index>(train[r]));
      yt(static_cast<Index>(r)) = y(static_cast<Index>(train[r]));
    }
    const Standardized s = standardize(xt, yt);
    const auto path = lasso_path(s, grid, unpenalized);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      auto [b0, coef] = unstandardize(s, path[k]);
      for (auto i : held) {
        const double e = y(static_cast<Index>(i)) - b0 - design.row(static_cast<Index>(i)).dot(coef);
        cv_error[k] += e * e;
      }
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(cv_error.begin(), cv_error.end()) - cv_error.begin());
  return fit_lasso(design, y, grid[best], unpenalized);
}

double default_sqrt_lasso_lambda(double c_sq, Index p, Index n) {
  if (p < 1 || n < 1) return 0.0;
  return c_sq * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

FittedModel fit_sqrt_lasso(const Matrix& design, const Vector& y, double lambda_sq) {
  if (!(lambda_sq >= 0.0)) throw InvalidArgument("fit_sqrt_lasso: lambda must be >= 0");
  if (design.rows() != y.size()) throw InvalidArgument("fit_sqrt_lasso: length mismatch");
  const Index n = y.size();
  if (n < 2) throw InvalidArgument("fit_sqrt_lasso needs at least 2 rows");
  if (detail::is_constant(y)) {
    FitDiagnostics diag;
    diag.degenerate_scale = lambda_sq > 0;
    diag.lambda = lambda_sq;
    return detail::constant_model(y(0), design.cols(), n).with_diagnostics(diag);
  }

  // Raw (unstandardized) columns so the KKT condition bounds
  // ||sum_i z_i r_i|| / ||r|| directly. Scaled-lasso iteration: alternate a
  // lasso solve at penalty lambda * sigma with sigma = ||r|| / sqrt(n).
  const Vector mean = design.colwise().mean().transpose();
  const Matrix xc = design.rowwise() - mean.transpose();
  const double y_mean = y.mean();
  const Vector yc = y.array() - y_mean;
  const double root_n = std::sqrt(static_cast<double>(n));

  Vector b = Vector::Zero(design.cols());
  Vector resid = yc;
  double sigma = resid.norm() / root_n;
  FitDiagnostics diag;
  diag.lambda = lambda_sq;
  diag.converged = false;
  for (int it = 1; it <= 1000; ++it) {
    bool cd_converged = false;
    coordinate_descent(xc, Vector::Constant(design.cols(), lambda_sq * sigma), b, resid, 1e-12,
                       cd_converged);
    const double next = resid.norm() / root_n;
    diag.iterations = it;
    const double change = std::abs(next - sigma);
    sigma = next;
    if (change < 1e-8 || sigma == 0.0) {
      diag.converged = cd_converged;
      break;
    }
  }
  if (sigma == 0.0 && lambda_sq > 0) diag.degenerate_scale = true;
  const double b0 = y_mean - mean.dot(b);
  return linear_model(design, b0, b).with_diagnostics(diag);
}

}  // namespace pcm
