#include "pcm/error.hpp"
#include "pcm/sim.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

namespace pcm {

namespace {

using Engine = RngStream::Engine;

struct Draws {
  Matrix z;
  Vector xi;
  Vector eps;
};

Matrix normal_matrix(Engine& rng, std::size_t n, Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(static_cast<Index>(n), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

Vector normal_vector(Engine& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Index>(n));
  for (Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return v;
}

Vector exponential_vector(Engine& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  Vector v(static_cast<Index>(n));
  for (Index i = 0; i < v.size(); ++i) v(i) = expo(rng);
  return v;
}

Vector sin_z1(const Matrix& z) {
  return z.col(0).unaryExpr([](double t) { return std::sin(2.0 * std::numbers::pi * t); });
}

Matrix column(const Vector& v) { return v; }

// Z ~ N_7, then xi (normal or Exp(1)), then eps; one engine per dataset.
Draws draw_7(const RngStream& seed, std::size_t n, bool exponential_xi) {
  Engine rng = seed.engine();
  Draws d;
  d.z = normal_matrix(rng, n, 7);
  d.xi = exponential_xi ? exponential_vector(rng, n) : normal_vector(rng, n);
  d.eps = normal_vector(rng, n);
  return d;
}

Dataset additive_case(int which, std::size_t n, const RngStream& seed) {
  const bool expo = which == 2;
  Draws d = draw_7(seed, n, expo);
  const Vector s = sin_z1(d.z);
  Vector x;
  Vector y;
  switch (which) {
    case 0:
      x = s + 0.1 * d.xi;
      y = s + d.eps;
      break;
    case 1:
      x = s + d.xi;
      y = s + 0.2 * x.cwiseAbs2() + d.eps;
      break;
    case 2: {
      const Vector xi = d.xi.array() - 1.0;  // xi + 1 ~ Exp(1)
      x = s - s.cwiseProduct(xi);
      y = s + 0.4 * x.cwiseAbs2() + d.eps;
      break;
    }
    default:
      x = s + d.xi;
      y = s + 0.4 * x.cwiseAbs2().cwiseProduct(d.z.col(1)) + d.eps;
      break;
  }
  return Dataset(column(x), std::move(y), std::move(d.z));
}

Dataset forest_case(int which, std::size_t n, const RngStream& seed) {
  Draws d = draw_7(seed, n, which == 2);
  const Vector s = sin_z1(d.z);
  const Vector s2 = s.cwiseProduct((1.0 + d.z.col(2).array()).matrix());
  Vector x;
  switch (which) {
    case 2:
      x = s2 - s.cwiseProduct((d.xi.array() - 1.0).matrix());  // xi ~ Exp(1)
      break;
    default:
      x = s2 + d.xi;
      break;
  }
  const Vector v = x.unaryExpr([](double t) { return t > 0 ? 1.5 : 0.5; });
  Vector y = s2 + v.cwiseProduct(d.eps);
  if (which == 1 || which == 2) y += 0.04 * x.cwiseAbs2();
  if (which == 3) y += 0.04 * x.cwiseAbs2().cwiseProduct(d.z.col(1));
  return Dataset(column(x), std::move(y), std::move(d.z));
}

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Z, xi ~ N_5, X = Z + xi, Y = beta X_1 + 2 (sigma(3 X_1) + sigma(3 Z_1)) eps.
Dataset linear_f1(double beta, std::size_t n, const RngStream& seed) {
  Engine rng = seed.engine();
  Matrix z = normal_matrix(rng, n, 5);
  const Matrix xi = normal_matrix(rng, n, 5);
  const Vector eps = normal_vector(rng, n);
  Matrix x = z + xi;
  Vector y(static_cast<Index>(n));
  for (Index i = 0; i < y.size(); ++i) {
    y(i) = beta * x(i, 0) + 2.0 * (logistic(3.0 * x(i, 0)) + logistic(3.0 * z(i, 0))) * eps(i);
  }
  return Dataset(std::move(x), std::move(y), std::move(z));
}

// Z ~ N_5, X = Z_1 + xi, Y = beta X + Z_1 + eps: every nuisance of the
// linear power formula is known (sigma_xi^2 = 1, sigma_beta = 1,
// sigma_eps_xi^2 = 2 beta^2 + 1).
Dataset linear_power(double beta, std::size_t n, const RngStream& seed) {
  Engine rng = seed.engine();
  Matrix z = normal_matrix(rng, n, 5);
  const Vector xi = normal_vector(rng, n);
  const Vector eps = normal_vector(rng, n);
  const Vector x = z.col(0) + xi;
  Vector y = beta * x + z.col(0) + eps;
  return Dataset(column(x), std::move(y), std::move(z));
}

Dataset linear_null(std::size_t n, const RngStream& seed) {
  Draws d = draw_7(seed, n, false);
  const Vector x = d.z.col(0) + 0.1 * d.xi;
  Vector y = d.z.col(0) + d.eps;
  return Dataset(column(x), std::move(y), std::move(d.z));
}

Dataset independent(std::size_t n, const RngStream& seed) {
  Engine rng = seed.engine();
  Matrix x = normal_matrix(rng, n, 1);
  Vector y = normal_vector(rng, n);
  Matrix z = normal_matrix(rng, n, 1);
  return Dataset(std::move(x), std::move(y), std::move(z));
}

double parse_beta(std::string_view args, std::string_view name) {
  constexpr std::string_view key = "beta=";
  if (args.substr(0, key.size()) != key) {
    throw LookupError("scenario '" + std::string(name) + "' accepts only ':beta=<value>'");
  }
  const auto value = args.substr(key.size());
  double beta = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), beta);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(beta)) {
    throw LookupError("bad beta in scenario '" + std::string(name) + "'");
  }
  return beta;
}

std::string format_beta(double beta) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), beta);
  return std::string(buf, res.ptr);
}

Scenario make(std::string name, std::string formula, ScenarioFamily family, bool is_null,
              std::vector<std::size_t> grid, Index dx, Index dz,
              std::function<Dataset(std::size_t, const RngStream&)> gen) {
  return Scenario{std::move(name), std::move(formula), family,    is_null,
                  std::move(grid), dx,                 dz,        std::move(gen)};
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"null-6.1", "alt1-6.1", "alt2-6.1", "alt3-6.1",   "null-6.2",      "alt1-6.2",
          "alt2-6.2", "alt3-6.2", "linear-F.1", "linear-power", "null-6.1-linear", "independent"};
}

Scenario find_scenario(std::string_view full_name) {
  const auto colon = full_name.find(':');
  const auto name = full_name.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : full_name.substr(colon + 1);
  const bool parameterized = name == "linear-F.1" || name == "linear-power";
  if (!args.empty() && !parameterized) {
    throw LookupError("scenario '" + std::string(name) + "' takes no parameters");
  }

  const std::vector<std::size_t> grid_61{250, 500, 1000};
  const std::vector<std::size_t> grid_62{10000, 20000, 40000};
  const char* names_61[] = {"null-6.1", "alt1-6.1", "alt2-6.1", "alt3-6.1"};
  const char* formulas_61[] = {
      "Z~N7, s=sin(2 pi Z1), X = s + 0.1 xi, Y = s + eps",
      "Z~N7, s=sin(2 pi Z1), X = s + xi, Y = s + 0.2 X^2 + eps",
      "Z~N7, s=sin(2 pi Z1), xi+1~Exp(1), X = s - s xi, Y = s + 0.4 X^2 + eps",
      "Z~N7, s=sin(2 pi Z1), X = s + xi, Y = s + 0.4 X^2 Z2 + eps"};
  const char* names_62[] = {"null-6.2", "alt1-6.2", "alt2-6.2", "alt3-6.2"};
  const char* formulas_62[] = {
      "Z~N7, s2=sin(2 pi Z1)(1+Z3), v=0.5+1{X>0}, X = s2 + xi, Y = s2 + v eps",
      "Z~N7, s2=sin(2 pi Z1)(1+Z3), v=0.5+1{X>0}, X = s2 + xi, Y = s2 + 0.04 X^2 + v eps",
      "Z~N7, xi~Exp(1), X = s2 - sin(2 pi Z1)(xi-1), Y = s2 + 0.04 X^2 + v eps",
      "Z~N7, X = s2 + xi, Y = s2 + 0.04 X^2 Z2 + v eps"};
  for (int k = 0; k < 4; ++k) {
    if (name == names_61[k]) {
      return make(names_61[k], formulas_61[k], ScenarioFamily::additive, k == 0, grid_61, 1, 7,
                  [k](std::size_t n, const RngStream& s) { return additive_case(k, n, s); });
    }
    if (name == names_62[k]) {
      return make(names_62[k], formulas_62[k], ScenarioFamily::forest, k == 0, grid_62, 1, 7,
                  [k](std::size_t n, const RngStream& s) { return forest_case(k, n, s); });
    }
  }
  if (parameterized) {
    const double beta = args.empty() ? 0.0 : parse_beta(args, name);
    const std::string full = std::string(name) + ":beta=" + format_beta(beta);
    if (name == "linear-F.1") {
      return make(full, "Z,xi~N5, X = Z + xi, Y = beta X1 + 2(sigma(3 X1) + sigma(3 Z1)) eps",
                  ScenarioFamily::linear, beta == 0.0, {100, 400, 1600, 6400}, 5, 5,
                  [beta](std::size_t n, const RngStream& s) { return linear_f1(beta, n, s); });
    }
    return make(full, "Z~N5, X = Z1 + xi, Y = beta X + Z1 + eps", ScenarioFamily::linear,
                beta == 0.0, {400}, 1, 5,
                [beta](std::size_t n, const RngStream& s) { return linear_power(beta, n, s); });
  }
  if (name == "null-6.1-linear") {
    return make("null-6.1-linear", "Z~N7, X = Z1 + 0.1 xi, Y = Z1 + eps", ScenarioFamily::linear,
                true, {500}, 1, 7, linear_null);
  }
  if (name == "independent") {
    return make("independent", "X, Y, Z iid N(0,1)", ScenarioFamily::linear, true, {500}, 1, 1,
                independent);
  }
  std::string valid;
  for (const auto& s : scenario_names()) valid += (valid.empty() ? "" : ", ") + s;
  throw LookupError("unknown scenario '" + std::string(full_name) + "'; valid names: " + valid);
}

Dataset generate(const Scenario& scenario, std::size_t n, const RngStream& seed) {
  if (n < 1) throw InvalidArgument("generate: n must be at least 1");
  return scenario.generator(n, seed);
}

}  // namespace pcm
