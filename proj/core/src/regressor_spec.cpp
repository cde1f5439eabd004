#include "pcm/error.hpp"
#include "pcm/regress.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace pcm {

namespace {

std::vector<std::string_view> split_list(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto tok = s.substr(start, pos == std::string_view::npos ? s.npos : pos - start);
    if (!tok.empty()) out.push_back(tok);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view text, std::string_view context) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("bad number '" + std::string(text) + "' in regressor '" +
                      std::string(context) + "'");
  }
  return v;
}

int to_int(std::string_view text, std::string_view context) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("bad integer '" + std::string(text) + "' in regressor '" +
                      std::string(context) + "'");
  }
  return v;
}

IndexSet to_columns(std::string_view text, std::string_view context) {
  IndexSet cols;
  for (auto tok : split_list(text, '+')) {
    const int c = to_int(tok, context);
    if (c < 0) throw ConfigError("negative column in regressor '" + std::string(context) + "'");
    cols.push_back(static_cast<std::size_t>(c));
  }
  return cols;
}

std::string join_columns(const IndexSet& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "+" : "") + std::to_string(cols[i]);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

RegressorSpec parse_regressor(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const auto parts = split_list(args, ',');

  auto key_value = [&](std::string_view part) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) return std::pair{part, std::string_view{}};
    return std::pair{part.substr(0, eq), part.substr(eq + 1)};
  };

  if (kind == "ols") {
    OlsSpec s;
    for (auto p : parts) {
      if (p == "nointercept") {
        s.intercept = false;
      } else {
        throw ConfigError("unknown ols option '" + std::string(p) + "'");
      }
    }
    return s;
  }
  if (kind == "lasso") {
    LassoSpec s;
    for (auto p : parts) {
      auto [k, v] = key_value(p);
      if (k == "cv") {
        s.lambda.reset();
      } else if (k == "unpen") {
        s.unpenalized = to_columns(v, text);
      } else if (v.empty()) {
        s.lambda = to_double(k, text);
      } else {
        throw ConfigError("unknown lasso option '" + std::string(k) + "'");
      }
    }
    if (s.lambda && *s.lambda < 0) throw ConfigError("lasso lambda must be >= 0");
    return s;
  }
  if (kind == "sqrtlasso") {
    SqrtLassoSpec s;
    for (auto p : parts) {
      auto [k, v] = key_value(p);
      if (k == "auto") {
        s.lambda.reset();
      } else if (k == "c") {
        s.c_sq = to_double(v, text);
      } else if (v.empty()) {
        s.lambda = to_double(k, text);
      } else {
        throw ConfigError("unknown sqrtlasso option '" + std::string(k) + "'");
      }
    }
    if (s.lambda && *s.lambda < 0) throw ConfigError("sqrtlasso lambda must be >= 0");
    if (!(s.c_sq > 0)) throw ConfigError("sqrtlasso c must be > 0");
    return s;
  }
  if (kind == "spline") {
    SplineSpec s;
    for (auto p : parts) {
      auto [k, v] = key_value(p);
      if (k == "r") {
        s.order = to_int(v, text);
      } else if (k == "N") {
        s.knots = to_int(v, text);
      } else if (k == "additive") {
        s.additive = true;
      } else if (k == "cols") {
        s.spline_columns = to_columns(v, text);
      } else if (k == "pen") {
        s.penalized = true;
      } else {
        throw ConfigError("unknown spline option '" + std::string(k) + "'");
      }
    }
    if (s.order < 1) throw ConfigError("spline order r must be >= 1");
    if (s.knots && *s.knots < 0) throw ConfigError("spline knot count N must be >= 0");
    if (!s.spline_columns.empty() && !s.additive) {
      throw ConfigError("spline cols= requires the additive option");
    }
    if (s.penalized && !s.additive) throw ConfigError("spline pen requires the additive option");
    return s;
  }
  if (kind == "forest") {
    ForestSpec s;
    for (auto p : parts) {
      auto [k, v] = key_value(p);
      if (k == "trees") {
        s.n_trees = to_int(v, text);
      } else if (k == "leaf") {
        s.min_leaf = to_int(v, text);
      } else if (k == "mtry") {
        s.mtry_fraction = to_double(v, text);
      } else if (k == "depth") {
        s.max_depth = to_int(v, text);
      } else if (k == "bootstrap") {
        s.bootstrap = to_int(v, text) != 0;
      } else {
        throw ConfigError("unknown forest option '" + std::string(k) + "'");
      }
    }
    if (s.n_trees < 1 || s.min_leaf < 1 || s.max_depth < 0 ||
        !(s.mtry_fraction > 0 && s.mtry_fraction <= 1)) {
      throw ConfigError("forest parameters out of range in '" + std::string(text) + "'");
    }
    return s;
  }
  throw ConfigError("unknown regressor '" + std::string(text) + "'");
}

std::string to_string(const RegressorSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, OlsSpec>) {
          return s.intercept ? "ols" : "ols:nointercept";
        } else if constexpr (std::is_same_v<S, LassoSpec>) {
          std::string out = "lasso:" + (s.lambda ? fmt(*s.lambda) : std::string("cv"));
          if (!s.unpenalized.empty()) out += ",unpen=" + join_columns(s.unpenalized);
          return out;
        } else if constexpr (std::is_same_v<S, SqrtLassoSpec>) {
          std::string out = "sqrtlasso:" + (s.lambda ? fmt(*s.lambda) : std::string("auto"));
          if (!s.lambda) out += ",c=" + fmt(s.c_sq);
          return out;
        } else if constexpr (std::is_same_v<S, SplineSpec>) {
          std::string out = "spline:r=" + std::to_string(s.order);
          if (s.knots) out += ",N=" + std::to_string(*s.knots);
          if (s.additive) out += ",additive";
          if (!s.spline_columns.empty()) out += ",cols=" + join_columns(s.spline_columns);
          if (s.penalized) out += ",pen";
          return out;
        } else {
          std::string out = "forest:trees=" + std::to_string(s.n_trees) +
                            ",leaf=" + std::to_string(s.min_leaf) + ",mtry=" + fmt(s.mtry_fraction);
          if (s.max_depth > 0) out += ",depth=" + std::to_string(s.max_depth);
          if (!s.bootstrap) out += ",bootstrap=0";
          return out;
        }
      },
      spec);
}

bool is_scale_equivariant(const RegressorSpec& spec) {
  return !std::holds_alternative<ForestSpec>(spec);
}

void check_sample_size(const RegressorSpec& spec, Index n, std::string_view role) {
  auto fail = [&](const std::string& why) {
    throw ConfigError(std::string(role) + " regressor '" + to_string(spec) + "': " + why +
                      " (have " + std::to_string(n) + " rows)");
  };
  if (n < 1) fail("no rows to fit on");
  if (const auto* f = std::get_if<ForestSpec>(&spec)) {
    if (n < 2 * static_cast<Index>(f->min_leaf)) {
      fail("needs at least 2*min_leaf = " + std::to_string(2 * f->min_leaf) + " rows");
    }
  } else if (const auto* l = std::get_if<LassoSpec>(&spec)) {
    if (!l->lambda && n < 10) fail("cross-validation needs at least 10 rows");
  } else if (std::holds_alternative<SqrtLassoSpec>(spec)) {
    if (n < 2) fail("needs at least 2 rows");
  }
}

}  // namespace pcm
