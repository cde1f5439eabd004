#include "pcm/error.hpp"
#include "pcm/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace pcm {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr Index kMaxTensorSize = 20000;

Vector min_norm_solve(const Matrix& design, const Vector& y) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(kRankThreshold);
  cod.compute(design);
  return cod.solve(y);
}

struct PenalizedSolution {
  Vector coef;
  double lambda = 0.0;
};

// Penalized least squares on `full` = [1, spline blocks..., linear columns]
// with a second-difference penalty on each spline block. The last function
// of every block is dropped (its coefficient is 0) because each block sums to
// the intercept column. One smoothing parameter, picked by GCV on a log grid.
// Returns nullopt when the problem is degenerate, so the caller can fall back
// to unpenalized least squares.
std::optional<PenalizedSolution> penalized_solve(const Matrix& full, const Vector& y,
                                                 const std::vector<Index>& block_sizes) {
  const Index n = full.rows();
  std::vector<Index> keep{0};
  std::vector<std::pair<Index, Index>> blocks;  // (start in reduced coords, kept size)
  Index col = 1;
  for (Index k : block_sizes) {
    blocks.emplace_back(static_cast<Index>(keep.size()), k - 1);
    for (Index j = 0; j + 1 < k; ++j) keep.push_back(col + j);
    col += k;
  }
  for (; col < full.cols(); ++col) keep.push_back(col);
  const auto p = static_cast<Index>(keep.size());

  Matrix f(n, p);
  for (Index j = 0; j < p; ++j) f.col(j) = full.col(keep[static_cast<std::size_t>(j)]);
  Matrix pen = Matrix::Zero(p, p);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Index k = block_sizes[b];
    if (k < 3) continue;
    Matrix d = Matrix::Zero(k - 2, k);
    for (Index i = 0; i + 2 < k; ++i) d.row(i).segment(i, 3) << 1.0, -2.0, 1.0;
    const Matrix dtd = d.transpose() * d;
    pen.block(blocks[b].first, blocks[b].first, k - 1, k - 1) = dtd.topLeftCorner(k - 1, k - 1);
  }
  const Matrix gram = f.transpose() * f;
  if (!(pen.trace() > 0.0)) return std::nullopt;
  pen *= gram.trace() / pen.trace();

  Eigen::LLT<Matrix> llt(gram + pen);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix r = llt.matrixU();
  const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  Matrix c = r_inv.transpose() * pen * r_inv;
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Vector lam = eig.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  const Matrix ru = r_inv * eig.eigenvectors();
  const Matrix w = f * ru;
  const Vector proj = w.transpose() * y;

  double best_score = std::numeric_limits<double>::infinity();
  double best_mu = 0.0;
  Vector best_shrink;
  for (int step = -24; step <= 24; ++step) {
    const double mu = std::pow(10.0, 0.25 * step);
    const Vector shrink = ((1.0 - lam.array()) + mu * lam.array()).inverse().matrix();
    const double edf = (1.0 - lam.array()).matrix().dot(shrink);
    const double slack = static_cast<double>(n) - edf;
    if (!(slack > 0.5)) continue;
    const double rss = (y - w * shrink.cwiseProduct(proj)).squaredNorm();
    const double score = static_cast<double>(n) * rss / (slack * slack);
    if (score < best_score) {
      best_score = score;
      best_mu = mu;
      best_shrink = shrink;
    }
  }
  if (best_shrink.size() == 0) return std::nullopt;

  const Vector reduced = ru * best_shrink.cwiseProduct(proj);
  PenalizedSolution out;
  out.coef = Vector::Zero(full.cols());
  for (Index j = 0; j < p; ++j) out.coef(keep[static_cast<std::size_t>(j)]) = reduced(j);
  out.lambda = best_mu;
  return out;
}

struct TensorImpl final : FittedModel::Impl {
  TensorBasis basis;
  Vector coef;
  std::optional<UnitMap> map;
  // Set when the response was constant: coef is then value * 1, which the
  // partition of unity turns into this value, returned without rounding.
  std::optional<double> constant;

  TensorImpl(TensorBasis b, Vector c, std::optional<UnitMap> m)
      : basis(std::move(b)), coef(std::move(c)), map(std::move(m)) {}

  Vector predict(const Matrix& design) const override {
    if (constant) {
      if (design.cols() != basis.dim()) basis.design(design);  // reports the mismatch
      return Vector::Constant(design.rows(), *constant);
    }
    return basis.design(map ? map->apply(design) : design) * coef;
  }

  // Components depending on the trailing axes only are the 1 (x) v part of
  // the coefficients, removed by projection_pi.
  std::shared_ptr<const Impl> drop_trailing_only(Index leading) const override {
    if (leading >= basis.dim()) return std::make_shared<TensorImpl>(*this);
    Vector reduced = Vector::Zero(coef.size());
    if (leading > 0) {
      Index k_x = 1;
      for (Index a = 0; a < leading; ++a) k_x *= basis.axes()[static_cast<std::size_t>(a)].size();
      reduced = projection_pi(coef, k_x, coef.size() / k_x);
    }
    return std::make_shared<TensorImpl>(basis, std::move(reduced), map);
  }
};

struct AdditiveImpl final : FittedModel::Impl {
  std::vector<Index> spline_cols;
  std::vector<BSplineBasis> bases;
  std::vector<Index> linear_cols;
  UnitMap map;  // over spline_cols only
  double intercept = 0.0;
  Vector coef;  // basis blocks in spline_cols order, then linear slopes

  Matrix expand(const Matrix& design) const {
    Matrix sub(design.rows(), static_cast<Index>(spline_cols.size()));
    for (std::size_t k = 0; k < spline_cols.size(); ++k) {
      sub.col(static_cast<Index>(k)) = design.col(spline_cols[k]);
    }
    const Matrix unit = map.apply(sub);
    Index width = static_cast<Index>(linear_cols.size());
    for (const auto& b : bases) width += b.size();
    Matrix out = Matrix::Zero(design.rows(), width);
    Index offset = 0;
    std::vector<double> local;
    for (std::size_t k = 0; k < bases.size(); ++k) {
      local.resize(static_cast<std::size_t>(bases[k].order()));
      for (Index i = 0; i < design.rows(); ++i) {
        const Index first = bases[k].evaluate_local(unit(i, static_cast<Index>(k)), local.data());
        for (std::size_t j = 0; j < local.size(); ++j) {
          out(i, offset + first + static_cast<Index>(j)) = local[j];
        }
      }
      offset += bases[k].size();
    }
    for (std::size_t k = 0; k < linear_cols.size(); ++k) {
      out.col(offset + static_cast<Index>(k)) = design.col(linear_cols[k]);
    }
    return out;
  }

  Vector predict(const Matrix& design) const override {
    Vector out = expand(design) * coef;
    out.array() += intercept;
    return out;
  }

  std::shared_ptr<const Impl> drop_trailing_only(Index leading) const override {
    auto out = std::make_shared<AdditiveImpl>(*this);
    out->intercept = 0.0;
    Index offset = 0;
    for (std::size_t k = 0; k < spline_cols.size(); ++k) {
      if (spline_cols[k] >= leading) out->coef.segment(offset, bases[k].size()).setZero();
      offset += bases[k].size();
    }
    for (std::size_t k = 0; k < linear_cols.size(); ++k) {
      if (linear_cols[k] >= leading) out->coef(offset + static_cast<Index>(k)) = 0.0;
    }
    return out;
  }
};

FittedModel fit_additive(const SplineSpec& spec, const Matrix& design, const Vector& y) {
  const Index p = design.cols();
  auto impl = std::make_shared<AdditiveImpl>();
  std::vector<bool> is_spline(static_cast<std::size_t>(p), spec.spline_columns.empty());
  for (auto c : spec.spline_columns) {
    if (static_cast<Index>(c) >= p) {
      throw ConfigError("spline column " + std::to_string(c) + " out of range for a design with " +
                        std::to_string(p) + " columns");
    }
    is_spline[c] = true;
  }
  for (Index j = 0; j < p; ++j) {
    (is_spline[static_cast<std::size_t>(j)] ? impl->spline_cols : impl->linear_cols).push_back(j);
  }
  const int knots = spec.knots ? *spec.knots : default_knot_count(design.rows(), spec.order, 1);
  for (std::size_t k = 0; k < impl->spline_cols.size(); ++k) {
    impl->bases.emplace_back(spec.order, knots);
  }
  Matrix sub(design.rows(), static_cast<Index>(impl->spline_cols.size()));
  for (std::size_t k = 0; k < impl->spline_cols.size(); ++k) {
    sub.col(static_cast<Index>(k)) = design.col(impl->spline_cols[k]);
  }
  impl->map = sub.cols() > 0 ? UnitMap(sub) : UnitMap(Matrix::Zero(design.rows(), 0));

  const Matrix expanded = impl->expand(design);
  Matrix full(design.rows(), expanded.cols() + 1);
  full << Matrix::Ones(design.rows(), 1), expanded;
  FitDiagnostics diag;
  Vector solution;
  if (spec.penalized) {
    std::vector<Index> sizes;
    for (const auto& b : impl->bases) sizes.push_back(b.size());
    if (auto pen = penalized_solve(full, y, sizes)) {
      solution = std::move(pen->coef);
      diag.lambda = pen->lambda;
    }
  }
  if (solution.size() == 0) solution = min_norm_solve(full, y);
  impl->intercept = solution(0);
  impl->coef = solution.tail(expanded.cols());

  Vector fitted = full * solution;
  diag.constant_column = impl->map.has_constant_column();
  Vector coef = impl->coef;
  const double b0 = impl->intercept;
  return FittedModel(std::move(impl), p, std::move(fitted))
      .with_coefficients(std::move(coef), b0)
      .with_diagnostics(diag);
}

}  // namespace

int default_knot_count(Index n, int order, Index dim) {
  if (n < 1) return 0;
  return static_cast<int>(std::lround(
      std::pow(static_cast<double>(n), 1.0 / (2.0 * order + static_cast<double>(dim)))));
}

FittedModel spline_regress(const Matrix& points, const Vector& y, const TensorBasis& tb) {
  if (points.rows() != y.size() || y.size() < 1) {
    throw InvalidArgument("spline_regress: points has " + std::to_string(points.rows()) +
                          " rows but y has " + std::to_string(y.size()));
  }
  const Matrix design = tb.design(points);
  if (detail::is_constant(y)) {
    Vector coef = Vector::Constant(tb.size(), y(0));
    auto impl = std::make_shared<TensorImpl>(tb, coef, std::nullopt);
    impl->constant = y(0);
    return FittedModel(std::move(impl), tb.dim(), Vector::Constant(y.size(), y(0)))
        .with_coefficients(std::move(coef), std::nullopt);
  }
  Vector coef = min_norm_solve(design, y);
  Vector fitted = design * coef;
  auto impl = std::make_shared<TensorImpl>(tb, coef, std::nullopt);
  return FittedModel(std::move(impl), tb.dim(), std::move(fitted))
      .with_coefficients(std::move(coef), std::nullopt);
}

FittedModel fit_spline(const SplineSpec& spec, const Matrix& design, const Vector& y) {
  if (design.rows() != y.size() || y.size() < 1) {
    throw InvalidArgument("fit_spline: design and y disagree in length");
  }
  if (spec.order < 1 || (spec.knots && *spec.knots < 0)) {
    throw InvalidArgument("fit_spline: order must be >= 1 and knots >= 0");
  }
  if (design.cols() < 1) throw InvalidArgument("fit_spline: design has no columns");
  if (spec.additive) {
    if (detail::is_constant(y)) return detail::constant_model(y(0), design.cols(), y.size());
    return fit_additive(spec, design, y);
  }

  const int knots =
      spec.knots ? *spec.knots : default_knot_count(design.rows(), spec.order, design.cols());
  std::vector<BSplineBasis> axes(static_cast<std::size_t>(design.cols()),
                                 BSplineBasis(spec.order, knots));
  double total = 1.0;
  for (const auto& a : axes) total *= static_cast<double>(a.size());
  if (total > static_cast<double>(kMaxTensorSize)) {
    throw ConfigError("tensor spline basis would have " + std::to_string(total) +
                      " functions; use fewer knots or the additive option");
  }
  TensorBasis basis(std::move(axes));
  UnitMap map(design);
  FitDiagnostics diag;
  diag.constant_column = map.has_constant_column();
  if (detail::is_constant(y)) {
    Vector coef = Vector::Constant(basis.size(), y(0));
    auto impl = std::make_shared<TensorImpl>(std::move(basis), coef, std::move(map));
    impl->constant = y(0);
    return FittedModel(std::move(impl), design.cols(), Vector::Constant(y.size(), y(0)))
        .with_coefficients(std::move(coef), std::nullopt)
        .with_diagnostics(diag);
  }
  const Matrix unit = map.apply(design);
  const Matrix phi = basis.design(unit);
  Vector coef = min_norm_solve(phi, y);
  Vector fitted = phi * coef;
  auto impl = std::make_shared<TensorImpl>(std::move(basis), coef, std::move(map));
  return FittedModel(std::move(impl), design.cols(), std::move(fitted))
      .with_coefficients(std::move(coef), std::nullopt)
      .with_diagnostics(diag);
}

}  // namespace pcm
