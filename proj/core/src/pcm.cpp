#include "pcm/pcm.hpp"

#include "pcm/error.hpp"
#include "pcm/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcm {

namespace {

// Sub-stream identifiers inside one split.
constexpr std::uint64_t kStreamG = 1;
constexpr std::uint64_t kStreamV = 2;
constexpr std::uint64_t kStreamMTilde = 3;
constexpr std::uint64_t kStreamMf = 4;
constexpr std::uint64_t kStreamM = 5;
constexpr std::uint64_t kStreamPlan = 100;
constexpr std::uint64_t kStreamSplitBase = 1000;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void require_z(const Dataset& data) {
  if (data.d_z() < 1) {
    throw ConfigError("conditional tests need at least one Z column (d_Z = 0)");
  }
}

}  // namespace

void PcmConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (B < 1) throw ConfigError("B must be at least 1");
}

Vector HhatFit::evaluate(const Dataset& data) const {
  if (sign == 0.0) return Vector::Zero(data.n());
  Vector h = g_tilde.predict(data.xz()) - m_tilde.predict(data.z());
  return sign * h;
}

Vector VhatFit::evaluate(const Dataset& data) const {
  if (!v_tilde) return Vector::Ones(data.n());
  Vector v = v_tilde->predict(data.xz()).cwiseMax(0.0);
  v.array() += c_hat;
  return v;
}

Vector ProjectionFn::evaluate(const Dataset& data, bool* floored) const {
  const Vector h = hhat(data);
  Vector v = vhat(data);
  bool hit = false;
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v(i) >= kVhatFloor)) {
      v(i) = kVhatFloor;
      hit = true;
    }
  }
  if (floored) *floored = hit;
  return h.cwiseQuotient(v);
}

HhatFit form_hhat(const Dataset& d2, const PcmConfig& config) {
  require_z(d2);
  const Matrix xz = d2.xz();
  FittedModel g_hat = fit(config.reg_g, xz, d2.y(), config.seed.derive(kStreamG));

  FittedModel g_tilde = g_hat;
  if (config.gtilde_mode == GtildeMode::zero_z_components) {
    if (auto reduced = g_hat.drop_trailing_only(d2.d_x(), xz)) g_tilde = std::move(*reduced);
  }
  const Vector& gt = g_tilde.fitted_values();
  FittedModel m_tilde = fit(config.reg_m, d2.z(), gt, config.seed.derive(kStreamMTilde));

  const Vector h_tilde = gt - m_tilde.fitted_values();
  const Vector weight = d2.y() - g_hat.fitted_values() + h_tilde;
  const double rho = weight.dot(h_tilde) / static_cast<double>(d2.n());

  HhatFit out{std::move(g_hat), std::move(g_tilde), std::move(m_tilde), rho, sgn(rho), d2.d_x()};
  if (h_tilde.isZero(0.0)) out.sign = 0.0;
  return out;
}

double solve_chat(const Vector& resid_sq, const Vector& vtilde) {
  if (resid_sq.size() != vtilde.size() || resid_sq.size() < 1) {
    throw InvalidArgument("solve_chat: vectors must have equal nonzero length");
  }
  const Vector v = vtilde.cwiseMax(0.0);
  const auto n = static_cast<double>(resid_sq.size());
  auto a = [&](double c) {
    double s = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
      if (resid_sq(i) == 0.0) continue;  // 0/0 := 0
      const double denom = v(i) + c;
      if (denom <= 0.0) return std::numeric_limits<double>::infinity();
      s += resid_sq(i) / denom;
    }
    return s / n;
  };
  if (a(0.0) <= 1.0) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  while (a(hi) > 1.0) {
    lo = hi;
    hi *= 2.0;
  }
  // Keep the upper end so that a(c^) <= 1 on return.
  for (int it = 0; it < 2000; ++it) {
    const double a_hi = a(hi);
    if (1.0 - a_hi <= 1e-10) break;
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (a(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

VhatFit form_vhat(const Dataset& d2, const FittedModel& g_hat, const PcmConfig& config) {
  VhatFit out;
  if (!config.reg_v) return out;
  const Matrix xz = d2.xz();
  const Vector resid = d2.y() - g_hat.fitted_values();
  const Vector resid_sq = resid.cwiseAbs2();
  FittedModel v_tilde = fit(*config.reg_v, xz, resid_sq, config.seed.derive(kStreamV));
  out.c_hat = solve_chat(resid_sq, v_tilde.fitted_values());
  out.v_tilde = std::move(v_tilde);
  return out;
}

StatisticResult statistic_from_products(Vector l_values) {
  StatisticResult out;
  const auto n = static_cast<double>(l_values.size());
  out.l_values = std::move(l_values);
  const Vector& l = out.l_values;
  if (l.size() == 0 || detail::is_constant(l)) {
    out.degenerate = true;
    return out;
  }
  const double mean = l.mean();
  // mean(L^2) - mean(L)^2, evaluated in the centred form.
  const double var = (l.array() - mean).square().sum() / n;
  out.denominator = std::sqrt(var);
  if (!(out.denominator > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.statistic = l.sum() / std::sqrt(n) / out.denominator;
  return out;
}

StatisticResult pcm_statistic(const Dataset& d1, const Vector& f_values, const PcmConfig& config) {
  require_z(d1);
  if (f_values.size() != d1.n()) throw InvalidArgument("pcm_statistic: f values length mismatch");
  const FittedModel m_f = fit(config.reg_mf, d1.z(), f_values, config.seed.derive(kStreamMf));
  const FittedModel m = fit(config.reg_m, d1.z(), d1.y(), config.seed.derive(kStreamM));
  const Vector l = (d1.y() - m.fitted_values()).cwiseProduct(f_values - m_f.fitted_values());
  return statistic_from_products(l);
}

StatisticResult pcm_statistic(const Dataset& d1, const ProjectionFn& f, const PcmConfig& config,
                              bool* floored) {
  return pcm_statistic(d1, f.evaluate(d1, floored), config);
}

void finish_result(TestResult& result, double alpha) {
  result.p_value = std::clamp(normal_sf(result.statistic), 0.0, 1.0);
  result.reject = result.statistic > normal_quantile(1.0 - alpha);
}

TestResult pcm_single(const Dataset& data, const IndexSet& i1, const IndexSet& i2,
                      const PcmConfig& config) {
  config.validate();
  require_z(data);
  if (i1.empty() || i2.empty()) throw InvalidArgument("pcm_single: both halves must be nonempty");
  std::vector<bool> seen(static_cast<std::size_t>(data.n()), false);
  for (const auto* part : {&i1, &i2}) {
    for (auto i : *part) {
      if (i >= seen.size() || seen[i]) {
        throw InvalidArgument("pcm_single: index sets must be disjoint and in range");
      }
      seen[i] = true;
    }
  }

  const auto n2 = static_cast<Index>(i2.size());
  const auto n1 = static_cast<Index>(i1.size());
  check_sample_size(config.reg_g, n2, "reg_g");
  if (config.reg_v) check_sample_size(*config.reg_v, n2, "reg_v");
  check_sample_size(config.reg_m, n2, "reg_m");
  check_sample_size(config.reg_mf, n1, "reg_mf");
  check_sample_size(config.reg_m, n1, "reg_m");

  const Dataset d2 = data.subset(i2);
  const Dataset d1 = data.subset(i1);
  HhatFit h = form_hhat(d2, config);
  VhatFit v = form_vhat(d2, h.g_hat, config);
  const ProjectionFn f(std::move(h), std::move(v));

  SplitDiagnostics diag;
  const StatisticResult stat = pcm_statistic(d1, f, config, &diag.vhat_floored);
  diag.statistic = stat.statistic;
  diag.rho_hat = f.h().rho_hat;
  diag.c_hat = f.v().c_hat;
  diag.denominator = stat.denominator;
  diag.degenerate = stat.degenerate;

  TestResult result;
  result.method = "pcm-single";
  result.statistic = stat.statistic;
  result.degenerate = stat.degenerate;
  result.per_split.push_back(diag);
  finish_result(result, config.alpha);
  return result;
}

SplitPlan split_plan(const PcmConfig& config, std::size_t n) {
  return multi_split(n, config.B, config.seed.derive(kStreamPlan));
}

PcmConfig split_config(const PcmConfig& config, std::size_t b) {
  PcmConfig out = config;
  out.seed = config.seed.derive(kStreamSplitBase + b);
  return out;
}

TestResult pcm_multi(const Dataset& data, const PcmConfig& config) {
  config.validate();
  require_z(data);
  const SplitPlan plan = split_plan(config, static_cast<std::size_t>(data.n()));
  std::vector<TestResult> runs(plan.pairs.size());
  parallel_for(plan.pairs.size(), std::max(1u, config.threads), [&](std::size_t b) {
    const auto& pair = plan.pairs[b];
    runs[b] = pcm_single(data, pair.first, pair.second, split_config(config, b));
  });

  TestResult result;
  result.method = "pcm";
  double total = 0.0;
  for (const auto& run : runs) {
    total += run.statistic;
    result.per_split.push_back(run.per_split.front());
    result.degenerate = result.degenerate || run.degenerate;
  }
  result.statistic = total / static_cast<double>(runs.size());
  finish_result(result, config.alpha);
  return result;
}

}  // namespace pcm
