#pragma once

#include "pcm/core.hpp"
#include "pcm/regress.hpp"

#include <vector>

namespace pcm {

/// Univariate B-spline basis of order r on [0,1] with N equi-spaced interior knots.
///
/// Knot vector: r zeros, j/(N+1) for j = 1..N, r ones; dimension K = N + r.
/// Intervals are half-open except the last, so B(1) is the left limit.
class BSplineBasis {
 public:
  BSplineBasis(int order, int interior_knots);

  int order() const noexcept { return order_; }
  int interior_knots() const noexcept { return interior_; }
  Index size() const noexcept { return interior_ + order_; }
  const std::vector<double>& knots() const noexcept { return knots_; }

  /// All K basis values at x. Throws DomainError when x is outside [0,1].
  Vector evaluate(double x) const;

  /// Writes the r possibly-nonzero values B_{first..first+r-1}(x) to `values`
  /// and returns `first`. `values` must hold order() doubles.
  Index evaluate_local(double x, double* values) const;

 private:
  int order_;
  int interior_;
  std::vector<double> knots_;
};

/// Tensor product of univariate bases. Axis 0 varies fastest in the flattened
/// index, so for two axes (X, Z) the index is k_Z * K_X + k_X. This ordering is
/// the block structure projection_pi expects.
class TensorBasis {
 public:
  explicit TensorBasis(std::vector<BSplineBasis> axes);

  Index dim() const noexcept { return static_cast<Index>(axes_.size()); }
  Index size() const noexcept { return size_; }
  const std::vector<BSplineBasis>& axes() const noexcept { return axes_; }

  /// Basis vector at a point of [0,1]^d. Throws InvalidArgument on a length
  /// mismatch and DomainError outside the cube.
  Vector evaluate(const Vector& point) const;

  /// Row i is evaluate(points.row(i)).
  Matrix design(const Matrix& points) const;

 private:
  std::vector<BSplineBasis> axes_;
  Index size_;
};

/// beta - 1 (x) beta_bar, where beta_bar_k is the mean of the k-th block of
/// K_X consecutive entries. Throws InvalidArgument unless beta has K_X * K_Z entries.
Vector projection_pi(const Vector& beta, Index k_x, Index k_z);

/// Per-column min-max map onto [0,1], learned on one sample and reused on
/// others. Values outside the training range are clamped; constant columns
/// map to 0.5.
class UnitMap {
 public:
  UnitMap() = default;
  explicit UnitMap(const Matrix& points);

  Matrix apply(const Matrix& points) const;
  /// Inverse on [0,1]; constant columns return their training value.
  Matrix invert(const Matrix& unit) const;

  const Vector& lower() const noexcept { return lo_; }
  const Vector& upper() const noexcept { return hi_; }
  bool has_constant_column() const noexcept { return any_constant_; }

 private:
  Vector lo_;
  Vector hi_;
  bool any_constant_ = false;
};

struct RescaledPoints {
  Matrix points;
  UnitMap map;
};

RescaledPoints rescale_to_unit(const Matrix& points);

/// Least squares (minimum norm, no intercept) of y on the tensor design.
/// The model predicts from points already in [0,1]^d and exposes the basis
/// coefficients in the TensorBasis ordering.
FittedModel spline_regress(const Matrix& points, const Vector& y, const TensorBasis& tb);

/// round(n^(1 / (2 order + dim))).
int default_knot_count(Index n, int order, Index dim);

/// The spline engine behind RegressorSpec: rescales columns with a UnitMap
/// learned on `design`, then fits a tensor or additive spline model.
FittedModel fit_spline(const SplineSpec& spec, const Matrix& design, const Vector& y);

}  // namespace pcm
