#include "pcm/error.hpp"
#include "pcm/regress.hpp"
#include "pcm/spline.hpp"

namespace pcm {

std::shared_ptr<const FittedModel::Impl> FittedModel::Impl::drop_trailing_only(Index) const {
  return nullptr;
}

FittedModel::FittedModel(std::shared_ptr<const Impl> impl, Index n_features, Vector fitted)
    : impl_(std::move(impl)), n_features_(n_features), fitted_(std::move(fitted)) {}

Vector FittedModel::predict(const Matrix& design) const {
  if (design.rows() == 0) return Vector(0);
  if (design.cols() != n_features_) {
    throw InvalidArgument("predict: expected " + std::to_string(n_features_) +
                          " columns, got " + std::to_string(design.cols()));
  }
  return impl_->predict(design);
}

FittedModel FittedModel::with_coefficients(Vector coef, std::optional<double> intercept) && {
  coefficients_ = std::move(coef);
  intercept_ = intercept;
  return std::move(*this);
}

FittedModel FittedModel::with_diagnostics(FitDiagnostics d) && {
  diagnostics_ = std::move(d);
  return std::move(*this);
}

std::optional<FittedModel> FittedModel::drop_trailing_only(Index leading,
                                                           const Matrix& design) const {
  auto reduced = impl_->drop_trailing_only(leading);
  if (!reduced) return std::nullopt;
  Vector fitted = design.rows() ? reduced->predict(design) : Vector(0);
  FittedModel out(std::move(reduced), n_features_, std::move(fitted));
  out.diagnostics_ = diagnostics_;
  return out;
}

Vector predict(const FittedModel& model, const Matrix& design) { return model.predict(design); }

namespace detail {

Vector LinearImpl::predict(const Matrix& design) const {
  Vector out = design * coef;
  out.array() += intercept;
  return out;
}

std::shared_ptr<const FittedModel::Impl> LinearImpl::drop_trailing_only(Index leading) const {
  auto out = std::make_shared<LinearImpl>();
  out->intercept = 0.0;
  out->coef = coef;
  out->coef.tail(coef.size() - std::min(leading, coef.size())).setZero();
  return out;
}

bool is_constant(const Vector& y) {
  for (Index i = 1; i < y.size(); ++i) {
    if (y(i) != y(0)) return false;
  }
  return true;
}

FittedModel constant_model(double value, Index n_features, Index n_rows) {
  auto impl = std::make_shared<LinearImpl>();
  impl->intercept = value;
  impl->coef = Vector::Zero(n_features);
  Vector coef = impl->coef;
  return FittedModel(std::move(impl), n_features, Vector::Constant(n_rows, value))
      .with_coefficients(std::move(coef), value);
}

}  // namespace detail

FittedModel fit(const RegressorSpec& spec, const Matrix& design, const Vector& y,
                const RngStream& stream) {
  return std::visit(
      [&](const auto& s) -> FittedModel {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, OlsSpec>) {
          return fit_ols(design, y, s.intercept);
        } else if constexpr (std::is_same_v<S, LassoSpec>) {
          if (s.lambda) return fit_lasso(design, y, *s.lambda, s.unpenalized);
          return fit_lasso_cv(design, y, s.unpenalized, stream);
        } else if constexpr (std::is_same_v<S, SqrtLassoSpec>) {
          const double lambda =
              s.lambda ? *s.lambda : default_sqrt_lasso_lambda(s.c_sq, design.cols(), design.rows());
          return fit_sqrt_lasso(design, y, lambda);
        } else if constexpr (std::is_same_v<S, SplineSpec>) {
          return fit_spline(s, design, y);
        } else {
          return fit_forest(design, y, s, stream);
        }
      },
      spec);
}

}  // namespace pcm
