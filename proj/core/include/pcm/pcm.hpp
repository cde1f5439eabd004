#pragma once

#include "pcm/core.hpp"
#include "pcm/regress.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcm {

enum class GtildeMode {
  /// g~ = g^.
  full,
  /// Drop the components of g^ that depend on Z alone (spline and linear engines).
  zero_z_components,
};

struct PcmConfig {
  /// Y on (X, Z).
  RegressorSpec reg_g = OlsSpec{};
  /// Squared residuals on (X, Z); nullopt means v^ = 1.
  std::optional<RegressorSpec> reg_v = RegressorSpec{OlsSpec{}};
  /// f^(X, Z) on Z.
  RegressorSpec reg_mf = OlsSpec{};
  /// Y on Z, and g~ on Z.
  RegressorSpec reg_m = OlsSpec{};
  std::size_t B = 6;
  double alpha = 0.05;
  RngStream seed{};
  GtildeMode gtilde_mode = GtildeMode::full;
  /// Worker threads for the B splits of pcm_multi.
  unsigned threads = 1;

  /// Throws ConfigError when alpha is outside (0,1) or B = 0.
  void validate() const;
};

struct SplitDiagnostics {
  double statistic = 0.0;
  double rho_hat = 0.0;
  double c_hat = 0.0;
  /// sqrt(mean(L^2) - mean(L)^2).
  double denominator = 0.0;
  /// Every L_i took the same value, so T was set to 0.
  bool degenerate = false;
  /// Some v^ value fell below 1e-12 and was floored.
  bool vhat_floored = false;
};

struct TestResult {
  double statistic = 0.0;
  /// 1 - Phi(statistic).
  double p_value = 1.0;
  bool reject = false;
  std::vector<SplitDiagnostics> per_split;
  bool degenerate = false;
  std::string method;
};

/// Output of the h^ stage, fitted on D2.
struct HhatFit {
  FittedModel g_hat;
  FittedModel g_tilde;
  FittedModel m_tilde;
  double rho_hat = 0.0;
  /// sgn(rho_hat), with sgn(0) = 0.
  double sign = 0.0;
  Index d_x = 0;

  /// h^ = sign * (g~(x, z) - m~(z)) at the rows of `data`.
  Vector evaluate(const Dataset& data) const;
};

struct VhatFit {
  /// nullopt when v^ = 1.
  std::optional<FittedModel> v_tilde;
  double c_hat = 0.0;

  /// max(v~, 0) + c^, or 1.
  Vector evaluate(const Dataset& data) const;
};

/// f^ = h^ / v^ with v^ floored at 1e-12.
class ProjectionFn {
 public:
  ProjectionFn(HhatFit h, VhatFit v) : h_(std::move(h)), v_(std::move(v)) {}

  Vector hhat(const Dataset& data) const { return h_.evaluate(data); }
  Vector vhat(const Dataset& data) const { return v_.evaluate(data); }
  /// Sets *floored when a v^ value had to be raised to the floor.
  Vector evaluate(const Dataset& data, bool* floored = nullptr) const;

  const HhatFit& h() const noexcept { return h_; }
  const VhatFit& v() const noexcept { return v_; }

 private:
  HhatFit h_;
  VhatFit v_;
};

/// Smallest v^ value used as a divisor.
inline constexpr double kVhatFloor = 1e-12;

HhatFit form_hhat(const Dataset& d2, const PcmConfig& config);

/// c^ = 0 when a(0) <= 1, else the root of a(c) = 1 with
/// a(c) = mean(resid_sq / (max(vtilde, 0) + c)), to |a(c^) - 1| <= 1e-10.
double solve_chat(const Vector& resid_sq, const Vector& vtilde);

VhatFit form_vhat(const Dataset& d2, const FittedModel& g_hat, const PcmConfig& config);

struct StatisticResult {
  double statistic = 0.0;
  double denominator = 0.0;
  bool degenerate = false;
  Vector l_values;
};

/// Fits m^_f and m^ on D1 and returns T from the products L_i.
StatisticResult pcm_statistic(const Dataset& d1, const ProjectionFn& f, const PcmConfig& config,
                              bool* floored = nullptr);

/// Same, with f^ already evaluated at the rows of D1.
StatisticResult pcm_statistic(const Dataset& d1, const Vector& f_values, const PcmConfig& config);

/// T = sum(L) / sqrt(n) / sqrt(mean(L^2) - mean(L)^2), 0 when all L_i are equal.
StatisticResult statistic_from_products(Vector l_values);

/// Single split: h^ and v^ on rows `i2`, statistic on rows `i1`.
TestResult pcm_single(const Dataset& data, const IndexSet& i1, const IndexSet& i2,
                      const PcmConfig& config);

/// Mean of B single-split statistics.
TestResult pcm_multi(const Dataset& data, const PcmConfig& config);

/// The splits pcm_multi uses.
SplitPlan split_plan(const PcmConfig& config, std::size_t n);
/// The configuration pcm_multi hands to split b.
PcmConfig split_config(const PcmConfig& config, std::size_t b);

/// Fills p_value and reject from the statistic (one-sided).
void finish_result(TestResult& result, double alpha);

struct SplinePcmOptions {
  int order = 4;
  /// Smoothness used in the default knot rate; 0 means equal to order.
  double smoothness = 0.0;
  /// Interior knots per X axis and per Z axis; nullopt picks the default rate.
  std::optional<int> knots_x;
  std::optional<int> knots_z;
  double alpha = 0.05;
  RngStream seed{};
};

/// Interior knots per axis for a d-dimensional tensor design on n points:
/// max(0, round(n^(2 / (4 s + d))) - order).
int spline_pcm_default_knots(std::size_t n, int order, double smoothness, Index d);

/// Four-fold tensor-spline PCM with v^ = 1.
TestResult spline_pcm(const Dataset& data, const SplinePcmOptions& options);

}  // namespace pcm
