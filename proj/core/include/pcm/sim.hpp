#pragma once

#include "pcm/core.hpp"
#include "pcm/pcm.hpp"
#include "pcm/regress.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcm {

/// Which regressor presets suit a scenario.
enum class ScenarioFamily { additive, forest, linear };

struct Scenario {
  std::string name;
  std::string formula;
  ScenarioFamily family = ScenarioFamily::linear;
  bool is_null = true;
  std::vector<std::size_t> default_n_grid;
  Index d_x = 1;
  Index d_z = 1;
  std::function<Dataset(std::size_t n, const RngStream& seed)> generator;
};

/// Base names of every scenario; parameterized ones accept ":beta=<b>".
std::vector<std::string> scenario_names();

/// Looks up "null-6.1", "alt2-6.2", "linear-F.1:beta=0.3", ... Throws LookupError.
Scenario find_scenario(std::string_view name);

/// n rows from the scenario. Throws InvalidArgument when n = 0.
Dataset generate(const Scenario& scenario, std::size_t n, const RngStream& seed);

enum class MethodKind { pcm, pcm_single, spline_pcm, gcm, williamson, wald };

MethodKind parse_method_kind(std::string_view name);
std::string to_string(MethodKind kind);
std::vector<std::string> method_names();

/// A test with all of its settings. Seeds inside are replaced per repetition.
struct MethodSpec {
  std::string label;
  MethodKind kind = MethodKind::pcm;
  /// Regressors for pcm and pcm-single; reg_g and reg_m also drive
  /// williamson, and reg_m is the Y-on-Z regression of gcm.
  PcmConfig pcm;
  /// X on Z for gcm.
  RegressorSpec reg_x = OlsSpec{};
  SplinePcmOptions spline;
  double alpha = 0.05;
};

/// Regressors used for a scenario family: additive splines, forests or OLS.
struct RegressorPreset {
  RegressorSpec on_xz;
  RegressorSpec on_z;
  std::optional<RegressorSpec> variance;
};

RegressorPreset preset_for(const Scenario& scenario);

/// The method with the preset regressors of `scenario` and B = 6.
MethodSpec default_method(std::string_view method, const Scenario& scenario);

struct MethodOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  bool degenerate = false;
};

MethodOutcome run_method(const MethodSpec& method, const Dataset& data, const RngStream& seed);

/// Data stream of repetition `rep`; shared by every method so they see the same datasets.
RngStream replication_stream(const RngStream& seed, std::string_view scenario, std::size_t n,
                             std::size_t rep);

/// Runs `reps` repetitions of one (scenario, method, n) cell on up to `threads` workers.
std::vector<MethodOutcome> replicate(const Scenario& scenario, const MethodSpec& method,
                                     std::size_t n, std::size_t reps, const RngStream& seed,
                                     unsigned threads);

struct ReportRow {
  std::string scenario;
  std::string method;
  std::size_t n = 0;
  std::size_t reps = 0;
  /// nullopt (NA) when the method failed on this cell.
  std::optional<double> rejection_rate;
  std::optional<double> mc_stderr;
  double wall_time_s = 0.0;
  std::string error;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

struct ExperimentSpec {
  std::vector<Scenario> scenarios;
  std::vector<MethodSpec> methods;
  /// Empty means each scenario's default grid.
  std::vector<std::size_t> n_grid;
  std::size_t reps = 100;
  RngStream seed{};
  unsigned threads = 1;
};

/// Errors raised by a method are recorded in the row and the run continues.
ExperimentReport run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { csv, json };

void write_report(std::ostream& out, const ExperimentReport& report, ReportFormat format);
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);
ExperimentReport read_report_json(std::istream& in);

}  // namespace pcm
