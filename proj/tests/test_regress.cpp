#include <doctest.h>

#include "pcm/error.hpp"
#include "pcm/regress.hpp"

#include <cmath>
#include <random>

using namespace pcm;

namespace {

Matrix gaussian(Index n, Index p, std::uint64_t seed) {
  auto rng = RngStream(seed).engine();
  std::normal_distribution<double> normal;
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) m(i, j) = normal(rng);
  }
  return m;
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

}  // namespace

TEST_CASE("ols on a column of ones") {
  const Matrix ones = Matrix::Ones(3, 1);
  const Vector y = Vector::Constant(3, 2.0);
  const auto no_icpt = fit_ols(ones, y, false);
  REQUIRE(no_icpt.coefficients());
  CHECK((*no_icpt.coefficients())(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK((y - no_icpt.fitted_values()).cwiseAbs().maxCoeff() < 1e-14);

  const auto with_icpt = fit_ols(ones, y);
  CHECK((y - with_icpt.fitted_values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ols recovers an exact linear relation") {
  const Matrix x = gaussian(30, 3, 1);
  Vector beta(3);
  beta << 1.5, -2.0, 0.25;
  const Vector y = (x * beta).array() + 4.0;
  const auto m = fit_ols(x, y);
  REQUIRE(m.coefficients());
  CHECK((*m.coefficients() - beta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(*m.intercept() - 4.0) < 1e-10);
  CHECK(m.predict(x) == m.fitted_values());
}

TEST_CASE("ols on a duplicated column gives the projection") {
  Matrix x = gaussian(20, 2, 2);
  x.col(1) = x.col(0);
  const Vector y = gaussian(20, 1, 3).col(0);
  const auto m = fit_ols(x, y);
  REQUIRE(m.coefficients());
  CHECK(m.coefficients()->allFinite());

  // Projection onto span{1, x0} through a rank-revealing factorization.
  Matrix a(20, 2);
  a.col(0).setOnes();
  a.col(1) = x.col(0);
  const Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Vector proj = a * qr.solve(y);
  CHECK((m.fitted_values() - proj).cwiseAbs().maxCoeff() < 1e-10);
  // Minimum norm splits the weight evenly.
  CHECK(std::abs((*m.coefficients())(0) - (*m.coefficients())(1)) < 1e-10);
}

TEST_CASE("ols residual orthogonality") {
  const Matrix x = gaussian(200, 5, 4);
  const Vector y = gaussian(200, 1, 5).col(0);
  const auto m = fit_ols(x, y);
  const Vector r = y - m.fitted_values();
  Matrix a(200, 6);
  a.col(0).setOnes();
  a.rightCols(5) = x;
  CHECK((a.transpose() * r).cwiseAbs().maxCoeff() / (a.norm() * r.norm()) < 1e-8);
  CHECK_THROWS_AS(fit_ols(x, Vector(3)), InvalidArgument);
}

TEST_CASE("predict edge cases") {
  const Matrix x = gaussian(10, 2, 6);
  const auto m = fit_ols(x, x.col(0));
  CHECK(m.predict(Matrix(0, 2)).size() == 0);
  CHECK_THROWS_AS(m.predict(Matrix(3, 3)), InvalidArgument);
  CHECK(predict(m, x) == m.fitted_values());
}

TEST_CASE("lasso with lambda 0 matches ols") {
  const Matrix x = gaussian(100, 4, 7);
  const Vector y = x.col(0) - x.col(2) + gaussian(100, 1, 8).col(0);
  const auto l = fit_lasso(x, y, 0.0);
  const auto o = fit_ols(x, y);
  CHECK((l.fitted_values() - o.fitted_values()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(fit_lasso(x, y, -1.0), InvalidArgument);
}

TEST_CASE("lasso with a large penalty kills every penalized slope") {
  const Matrix x = gaussian(50, 3, 9);
  const Vector y = 3.0 * x.col(1) + gaussian(50, 1, 10).col(0);
  const auto l = fit_lasso(x, y, 1e6);
  CHECK(l.coefficients()->cwiseAbs().maxCoeff() == 0.0);
  CHECK(*l.intercept() == doctest::Approx(y.mean()));

  const IndexSet keep{1};
  const auto u = fit_lasso(x, y, 1e6, keep);
  CHECK((*u.coefficients())(0) == 0.0);
  CHECK((*u.coefficients())(1) != 0.0);
}

TEST_CASE("lasso on an orthonormal design soft-thresholds ols") {
  // Columns are centred with unit population variance and orthogonal. With
  // y scaled by its population sd s, the minimiser of
  // (1/2n)||y/s - Xb||^2 + lambda |b|_1 is S(x_j'y / (n s), lambda), which in
  // units of y is S(x_j'y / n, lambda s).
  Matrix x(4, 2);
  x << 1, 1, 1, -1, -1, 1, -1, -1;
  Vector y(4);
  y << 3.0, 1.0, -0.5, -2.5;
  const double s = std::sqrt((y.array() - y.mean()).square().mean());
  for (double lambda : {0.0, 0.3, 0.9, 1.6, 5.0}) {
    const auto l = fit_lasso(x, y, lambda);
    for (Index j = 0; j < 2; ++j) {
      const double ols = x.col(j).dot(y) / 4.0;
      CHECK((*l.coefficients())(j) == doctest::Approx(soft(ols, lambda * s)).epsilon(1e-9));
    }
    CHECK(*l.intercept() == doctest::Approx(y.mean()));
  }
}

TEST_CASE("lasso KKT conditions on standardized columns") {
  const Index n = 120;
  const Matrix x = gaussian(n, 6, 11);
  const Vector y = 2.0 * x.col(0) - x.col(3) + gaussian(n, 1, 12).col(0);
  const double lambda = 0.1;
  const auto l = fit_lasso(x, y, lambda);
  const Vector r = y - l.fitted_values();
  const double y_sd = std::sqrt((y.array() - y.mean()).square().mean());
  for (Index j = 0; j < 6; ++j) {
    const Vector c = x.col(j).array() - x.col(j).mean();
    const double sd = std::sqrt(c.squaredNorm() / n);
    const double grad = (c / sd).dot(r) / n / y_sd;
    if ((*l.coefficients())(j) != 0.0) {
      CHECK(std::abs(std::abs(grad) - lambda) < 1e-6);
    } else {
      CHECK(std::abs(grad) <= lambda + 1e-6);
    }
  }
}

TEST_CASE("lasso cross-validation is deterministic") {
  const Matrix x = gaussian(80, 10, 13);
  const Vector y = x.col(0) + 0.5 * gaussian(80, 1, 14).col(0);
  const auto a = fit_lasso_cv(x, y, {}, RngStream(3));
  const auto b = fit_lasso_cv(x, y, {}, RngStream(3));
  CHECK(a.fitted_values() == b.fitted_values());
  REQUIRE(a.diagnostics().lambda);
  CHECK(*a.diagnostics().lambda > 0.0);
  CHECK((*a.coefficients())(0) > 0.5);
  CHECK_THROWS_AS(fit_lasso_cv(x.topRows(5), y.head(5), {}, RngStream(3)), InvalidArgument);
}

TEST_CASE("sqrt lasso with lambda 0 matches ols") {
  const Matrix x = gaussian(60, 3, 15);
  const Vector y = x.col(1) + gaussian(60, 1, 16).col(0);
  const auto s = fit_sqrt_lasso(x, y, 0.0);
  CHECK((s.fitted_values() - fit_ols(x, y).fitted_values()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sqrt lasso matches a scalar fixed point") {
  // One centred predictor with x'x / n = 1: the solution satisfies
  // b = S(b_ols, lambda * sigma(b)), sigma(b)^2 = s_yy - 2 b b_ols + b^2.
  const Index n = 50;
  Vector xv = gaussian(n, 1, 17).col(0);
  xv = xv.array() - xv.mean();
  xv /= std::sqrt(xv.squaredNorm() / n);
  const Vector y = 0.7 * xv + gaussian(n, 1, 18).col(0);
  const Vector yc = y.array() - y.mean();
  const double b_ols = xv.dot(yc) / n;
  const double s_yy = yc.squaredNorm() / n;
  const double lambda = 0.3;
  double b = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const double sigma = std::sqrt(s_yy - 2.0 * b * b_ols + b * b);
    const double next = soft(b_ols, lambda * sigma);
    if (std::abs(next - b) < 1e-15) break;
    b = next;
  }
  const auto s = fit_sqrt_lasso(Matrix(xv), y, lambda);
  CHECK((*s.coefficients())(0) == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("sqrt lasso edge cases") {
  CHECK(default_sqrt_lasso_lambda(1.1, 100, 400) ==
        doctest::Approx(1.1 * std::sqrt(std::log(100.0) / 400.0)).epsilon(1e-15));
  const Matrix x = gaussian(10, 2, 19);
  const auto s = fit_sqrt_lasso(x, Vector::Constant(10, 3.0), 0.5);
  CHECK(s.diagnostics().degenerate_scale);
  CHECK(s.coefficients()->cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.fitted_values() == Vector::Constant(10, 3.0));
}

TEST_CASE("forest on constant and single-leaf data") {
  const Matrix x = gaussian(40, 2, 20);
  ForestSpec spec;
  spec.n_trees = 10;
  const auto c = fit_forest(x, Vector::Constant(40, -1.25), spec, RngStream(1));
  CHECK(c.predict(gaussian(5, 2, 21)) == Vector::Constant(5, -1.25));

  const Vector y = gaussian(40, 1, 22).col(0);
  ForestSpec one;
  one.n_trees = 1;
  one.min_leaf = 40;
  one.bootstrap = false;
  const auto f = fit_forest(x, y, one, RngStream(2));
  CHECK((f.fitted_values().array() - y.mean()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("forest learns a step function") {
  auto rng = RngStream(23).engine();
  std::uniform_real_distribution<double> unif;
  auto sample = [&](Index n, Matrix& x, Vector& y) {
    x.resize(n, 1);
    y.resize(n);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = unif(rng);
      y(i) = x(i, 0) > 0.5 ? 1.0 : 0.0;
    }
  };
  Matrix x, xt;
  Vector y, yt;
  sample(200, x, y);
  sample(500, xt, yt);
  ForestSpec spec;
  spec.n_trees = 100;
  const auto f = fit_forest(x, y, spec, RngStream(4));
  CHECK((f.predict(xt) - yt).squaredNorm() / 500.0 < 0.05);

  const auto again = fit_forest(x, y, spec, RngStream(4));
  CHECK(again.predict(xt) == f.predict(xt));
}

TEST_CASE("scale equivariance of linear and spline engines") {
  const Matrix x = gaussian(80, 2, 24);
  const Vector y = x.col(0).array().sin() + 0.3 * gaussian(80, 1, 25).col(0).array();
  const double a = 4.0;
  for (std::string text : {"ols", "lasso:0.05", "sqrtlasso:auto", "spline:r=3,N=3",
                           "spline:r=4,N=16,additive,pen"}) {
    CAPTURE(text);
    const auto spec = parse_regressor(text);
    CHECK(is_scale_equivariant(spec));
    const auto f1 = fit(spec, x, y, RngStream(1));
    const auto f2 = fit(spec, x, a * y, RngStream(1));
    CHECK((a * f1.fitted_values() - f2.fitted_values()).cwiseAbs().maxCoeff() <
          1e-8 * (1.0 + f2.fitted_values().cwiseAbs().maxCoeff()));
  }
  CHECK_FALSE(is_scale_equivariant(parse_regressor("forest")));
}

TEST_CASE("constant responses are fitted exactly by every engine") {
  const Matrix x = gaussian(30, 3, 26);
  const Vector y = Vector::Constant(30, 0.1);
  for (const char* text : {"ols", "lasso:0.1", "lasso:cv", "sqrtlasso:auto", "spline:r=2,N=2",
                           "spline:r=4,N=4,additive", "forest:trees=5"}) {
    CAPTURE(text);
    const auto m = fit(parse_regressor(text), x, y, RngStream(2));
    CHECK(m.fitted_values() == y);
    CHECK(m.predict(gaussian(4, 3, 27)) == Vector::Constant(4, 0.1));
  }
}

TEST_CASE("regressor mini-language") {
  for (const char* text : {"ols", "ols:nointercept", "lasso:cv", "lasso:0.1", "sqrtlasso:auto",
                           "spline:r=4,N=8", "spline:r=4,N=32,additive,cols=0+1",
                           "forest:trees=200,leaf=5"}) {
    CAPTURE(text);
    const auto spec = parse_regressor(text);
    CHECK(to_string(parse_regressor(to_string(spec))) == to_string(spec));
  }
  CHECK(std::get<LassoSpec>(parse_regressor("lasso:0.1")).lambda == 0.1);
  CHECK_FALSE(std::get<LassoSpec>(parse_regressor("lasso:cv")).lambda);
  CHECK(std::get<ForestSpec>(parse_regressor("forest:trees=200,leaf=5")).n_trees == 200);
  CHECK(std::get<SplineSpec>(parse_regressor("spline:r=4,N=8")).knots == 8);
  for (const char* bad : {"", "boost", "lasso:-1", "spline:r=0", "forest:trees=0", "ols:x",
                          "spline:cols=0"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_regressor(bad), ConfigError);
  }
}

TEST_CASE("sample size checks name the regressor") {
  const auto forest = parse_regressor("forest:trees=10,leaf=5");
  CHECK_NOTHROW(check_sample_size(forest, 10, "reg_g"));
  try {
    check_sample_size(forest, 9, "reg_g");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("forest") != std::string::npos);
    CHECK(std::string(e.what()).find("reg_g") != std::string::npos);
  }
}

TEST_CASE("linear models drop trailing columns") {
  const Matrix x = gaussian(25, 3, 28);
  const Vector y = (x.col(0) + 2.0 * x.col(2)).array() + 1.0;
  const auto m = fit_ols(x, y);
  const auto dropped = m.drop_trailing_only(1, x);
  REQUIRE(dropped);
  CHECK((dropped->fitted_values() - x.col(0)).cwiseAbs().maxCoeff() < 1e-10);
  ForestSpec spec;
  spec.n_trees = 3;
  CHECK_FALSE(fit_forest(x, y, spec, RngStream(1)).drop_trailing_only(1, x));
}
