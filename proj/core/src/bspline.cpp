#include "pcm/error.hpp"
#include "pcm/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcm {

BSplineBasis::BSplineBasis(int order, int interior_knots)
    : order_(order), interior_(interior_knots) {
  if (order < 1) throw InvalidArgument("spline order must be >= 1");
  if (interior_knots < 0) throw InvalidArgument("interior knot count must be >= 0");
  knots_.assign(static_cast<std::size_t>(order), 0.0);
  for (int j = 1; j <= interior_knots; ++j) {
    knots_.push_back(static_cast<double>(j) / static_cast<double>(interior_knots + 1));
  }
  knots_.insert(knots_.end(), static_cast<std::size_t>(order), 1.0);
}

Index BSplineBasis::evaluate_local(double x, double* values) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("B-spline evaluated at " + std::to_string(x) + ", outside [0,1]");
  }
  const int degree = order_ - 1;
  const int last_span = static_cast<int>(size()) - 1;

  // Span mu with t_mu <= x < t_{mu+1}; x = 1 falls into the last (closed) span.
  int mu = degree + static_cast<int>(x * (interior_ + 1));
  mu = std::clamp(mu, degree, last_span);
  const auto& t = knots_;
  while (mu < last_span && x >= t[static_cast<std::size_t>(mu + 1)]) ++mu;
  while (mu > degree && x < t[static_cast<std::size_t>(mu)]) --mu;

  // Triangular form of the Cox-de Boor recursion restricted to the r
  // functions that can be nonzero on the span. Every denominator here is the
  // width of a nonempty knot interval, so the 0/0 terms never arise.
  double left[16];
  double right[16];
  std::vector<double> heap_left;
  std::vector<double> heap_right;
  double* lp = left;
  double* rp = right;
  if (order_ > 16) {
    heap_left.resize(static_cast<std::size_t>(order_));
    heap_right.resize(static_cast<std::size_t>(order_));
    lp = heap_left.data();
    rp = heap_right.data();
  }
  values[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    lp[j] = x - t[static_cast<std::size_t>(mu + 1 - j)];
    rp[j] = t[static_cast<std::size_t>(mu + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = values[r] / (rp[r + 1] + lp[j - r]);
      values[r] = saved + rp[r + 1] * temp;
      saved = lp[j - r] * temp;
    }
    values[j] = saved;
  }
  return mu - degree;
}

Vector BSplineBasis::evaluate(double x) const {
  Vector out = Vector::Zero(size());
  std::vector<double> local(static_cast<std::size_t>(order_));
  const Index first = evaluate_local(x, local.data());
  for (int j = 0; j < order_; ++j) out(first + j) = local[static_cast<std::size_t>(j)];
  return out;
}

TensorBasis::TensorBasis(std::vector<BSplineBasis> axes) : axes_(std::move(axes)), size_(1) {
  if (axes_.empty()) throw InvalidArgument("tensor basis needs at least one axis");
  for (const auto& a : axes_) size_ *= a.size();
}

namespace {

struct Term {
  Index index;
  double value;
};

// Nonzero entries of the tensor basis at one point, axis 0 fastest.
void tensor_terms(const std::vector<BSplineBasis>& axes, const double* point,
                  std::vector<Term>& terms, std::vector<double>& scratch) {
  terms.assign(1, Term{0, 1.0});
  Index stride = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const auto& axis = axes[a];
    scratch.resize(static_cast<std::size_t>(axis.order()));
    const Index first = axis.evaluate_local(point[a], scratch.data());
    const std::size_t before = terms.size();
    std::vector<Term> next;
    next.reserve(before * scratch.size());
    for (const auto& term : terms) {
      for (std::size_t j = 0; j < scratch.size(); ++j) {
        next.push_back(Term{term.index + (first + static_cast<Index>(j)) * stride,
                            term.value * scratch[j]});
      }
    }
    terms = std::move(next);
    stride *= axis.size();
  }
}

}  // namespace

Vector TensorBasis::evaluate(const Vector& point) const {
  if (point.size() != dim()) {
    throw InvalidArgument("tensor basis of dimension " + std::to_string(dim()) +
                          " evaluated at a point of length " + std::to_string(point.size()));
  }
  Vector out = Vector::Zero(size_);
  std::vector<Term> terms;
  std::vector<double> scratch;
  tensor_terms(axes_, point.data(), terms, scratch);
  for (const auto& term : terms) out(term.index) += term.value;
  return out;
}

Matrix TensorBasis::design(const Matrix& points) const {
  if (points.cols() != dim()) {
    throw InvalidArgument("tensor basis of dimension " + std::to_string(dim()) +
                          " given points with " + std::to_string(points.cols()) + " columns");
  }
  Matrix out = Matrix::Zero(points.rows(), size_);
  std::vector<Term> terms;
  std::vector<double> scratch;
  std::vector<double> row(static_cast<std::size_t>(dim()));
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index a = 0; a < dim(); ++a) row[static_cast<std::size_t>(a)] = points(i, a);
    tensor_terms(axes_, row.data(), terms, scratch);
    for (const auto& term : terms) out(i, term.index) += term.value;
  }
  return out;
}

Vector projection_pi(const Vector& beta, Index k_x, Index k_z) {
  if (k_x < 1 || k_z < 1 || beta.size() != k_x * k_z) {
    throw InvalidArgument("projection_pi: expected " + std::to_string(k_x) + " x " +
                          std::to_string(k_z) + " coefficients, got " +
                          std::to_string(beta.size()));
  }
  // Left-to-right sums so the zero-sum check below sees exactly the value
  // the last entry was chosen to cancel.
  auto ordered_sum = [k_x](const auto& block) {
    double s = 0.0;
    for (Index j = 0; j < k_x; ++j) s += block(j);
    return s;
  };
  Vector out = beta;
  for (Index k = 0; k < k_z; ++k) {
    auto block = out.segment(k * k_x, k_x);
    // A block that already sums to zero is in the range of Pi; leaving it
    // untouched makes Pi idempotent in floating point.
    if (ordered_sum(block) == 0.0) continue;
    // Mean as first + mean deviation, so a constant block gives its value back exactly.
    const double first = block(0);
    const double mean = first + (block.array() - first).sum() / static_cast<double>(k_x);
    block.array() -= mean;
    double head = 0.0;
    for (Index j = 0; j + 1 < k_x; ++j) head += block(j);
    block(k_x - 1) = 0.0 - head;
  }
  return out;
}

UnitMap::UnitMap(const Matrix& points) {
  if (points.rows() < 1) throw InvalidArgument("UnitMap needs at least one row");
  if (!points.allFinite()) throw InvalidArgument("UnitMap needs finite entries");
  lo_ = points.colwise().minCoeff().transpose();
  hi_ = points.colwise().maxCoeff().transpose();
  any_constant_ = (hi_.array() <= lo_.array()).any();
}

Matrix UnitMap::apply(const Matrix& points) const {
  if (points.cols() != lo_.size()) {
    throw InvalidArgument("UnitMap::apply: column count mismatch");
  }
  Matrix out(points.rows(), points.cols());
  for (Index j = 0; j < points.cols(); ++j) {
    const double width = hi_(j) - lo_(j);
    for (Index i = 0; i < points.rows(); ++i) {
      out(i, j) = width > 0 ? std::clamp((points(i, j) - lo_(j)) / width, 0.0, 1.0) : 0.5;
    }
  }
  return out;
}

Matrix UnitMap::invert(const Matrix& unit) const {
  if (unit.cols() != lo_.size()) {
    throw InvalidArgument("UnitMap::invert: column count mismatch");
  }
  Matrix out(unit.rows(), unit.cols());
  for (Index j = 0; j < unit.cols(); ++j) {
    const double width = hi_(j) - lo_(j);
    for (Index i = 0; i < unit.rows(); ++i) {
      out(i, j) = width > 0 ? lo_(j) + unit(i, j) * width : lo_(j);
    }
  }
  return out;
}

RescaledPoints rescale_to_unit(const Matrix& points) {
  UnitMap map(points);
  Matrix unit = map.apply(points);
  return {std::move(unit), std::move(map)};
}

}  // namespace pcm
