#pragma once

#include "pcm/core.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace pcm {

/// Ordinary least squares, minimum-norm solution on rank-deficient designs.
struct OlsSpec {
  bool intercept = true;
};

/// Lasso on internally standardized columns, with y divided by its population
/// sd so lambda is unit free. No lambda means 5-fold cross-validation over a
/// 50-point log grid.
struct LassoSpec {
  std::optional<double> lambda;
  IndexSet unpenalized;
};

/// Square-root lasso. No lambda means c_sq * sqrt(log(p) / n).
struct SqrtLassoSpec {
  std::optional<double> lambda;
  double c_sq = 1.1;
};

/// B-spline series regression on min-max rescaled columns.
///
/// Tensor mode uses one tensor basis over every column (first column fastest).
/// Additive mode gives each column in `spline_columns` (all columns when
/// empty) its own univariate basis, enters the remaining columns linearly and
/// adds an intercept. No `knots` means round(n^(1/(2r+d))) interior knots,
/// with d the tensor dimension (1 in additive mode).
///
/// `penalized` (additive mode only) adds a second-difference penalty on each
/// spline block, with one smoothing parameter chosen by generalized
/// cross-validation.
struct SplineSpec {
  int order = 4;
  std::optional<int> knots;
  bool additive = false;
  std::vector<std::size_t> spline_columns;
  bool penalized = false;
};

/// Bagged CART regression trees. max_depth = 0 means unlimited.
struct ForestSpec {
  int n_trees = 200;
  int min_leaf = 5;
  double mtry_fraction = 1.0 / 3.0;
  int max_depth = 0;
  bool bootstrap = true;
};

using RegressorSpec = std::variant<OlsSpec, LassoSpec, SqrtLassoSpec, SplineSpec, ForestSpec>;

/// Parses the regressor mini-language: "ols", "lasso:cv", "lasso:0.1",
/// "sqrtlasso:auto", "spline:r=4,N=8", "spline:r=4,N=32,additive,cols=0+1,pen",
/// "forest:trees=200,leaf=5".
RegressorSpec parse_regressor(std::string_view text);
std::string to_string(const RegressorSpec& spec);

/// True for engines whose fitted values scale exactly with the response.
bool is_scale_equivariant(const RegressorSpec& spec);

/// Throws ConfigError naming the regressor when n rows cannot support it.
void check_sample_size(const RegressorSpec& spec, Index n, std::string_view role);

struct FitDiagnostics {
  int iterations = 0;
  bool converged = true;
  /// Square-root lasso on a response with zero variance.
  bool degenerate_scale = false;
  /// Penalty actually used (lasso variants, penalized splines).
  std::optional<double> lambda;
  /// Rescaling hit a constant column (spline engines).
  bool constant_column = false;
};

/// A fitted regression function. Cheap to copy, immutable, thread-safe.
class FittedModel {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual Vector predict(const Matrix& design) const = 0;
    /// The model with every component that involves only columns >= `leading`
    /// set to zero, or null when the engine cannot separate components.
    virtual std::shared_ptr<const Impl> drop_trailing_only(Index leading) const;
  };

  FittedModel(std::shared_ptr<const Impl> impl, Index n_features, Vector fitted);

  Vector predict(const Matrix& design) const;

  Index n_features() const noexcept { return n_features_; }
  const Vector& fitted_values() const noexcept { return fitted_; }

  /// Slope coefficients in original units (linear and spline engines).
  const std::optional<Vector>& coefficients() const noexcept { return coefficients_; }
  std::optional<double> intercept() const noexcept { return intercept_; }
  const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  FittedModel with_coefficients(Vector coef, std::optional<double> intercept) &&;
  FittedModel with_diagnostics(FitDiagnostics d) &&;

  /// Removes components that depend only on the trailing columns (>= leading),
  /// refitting nothing. `design` is the training design, used for the new
  /// fitted values. Returns nullopt when the engine is not decomposable.
  std::optional<FittedModel> drop_trailing_only(Index leading, const Matrix& design) const;

 private:
  std::shared_ptr<const Impl> impl_;
  Index n_features_;
  Vector fitted_;
  std::optional<Vector> coefficients_;
  std::optional<double> intercept_;
  FitDiagnostics diagnostics_;
};

/// Same as model.predict(design).
Vector predict(const FittedModel& model, const Matrix& design);

FittedModel fit_ols(const Matrix& design, const Vector& y, bool intercept = true);

FittedModel fit_lasso(const Matrix& design, const Vector& y, double lambda,
                      const IndexSet& unpenalized = {});

/// Lasso with lambda picked by 5-fold cross-validation; folds drawn from `stream`.
FittedModel fit_lasso_cv(const Matrix& design, const Vector& y, const IndexSet& unpenalized,
                         const RngStream& stream);

/// c_sq * sqrt(log(p) / n).
double default_sqrt_lasso_lambda(double c_sq, Index p, Index n);

FittedModel fit_sqrt_lasso(const Matrix& design, const Vector& y, double lambda_sq);

FittedModel fit_forest(const Matrix& design, const Vector& y, const ForestSpec& params,
                       const RngStream& stream);

/// Dispatches on `spec`. `stream` feeds engines that draw random numbers.
FittedModel fit(const RegressorSpec& spec, const Matrix& design, const Vector& y,
                const RngStream& stream);

namespace detail {

/// Predicts `value` everywhere; used for constant responses.
FittedModel constant_model(double value, Index n_features, Index n_rows);

/// All entries identical (bitwise comparison against the first).
bool is_constant(const Vector& y);

struct LinearImpl final : FittedModel::Impl {
  double intercept = 0.0;
  Vector coef;

  Vector predict(const Matrix& design) const override;
  std::shared_ptr<const Impl> drop_trailing_only(Index leading) const override;
};

}  // namespace detail

}  // namespace pcm
