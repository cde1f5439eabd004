// pcm: run a conditional mean independence test on a CSV, run simulation
// suites, evaluate analytic power, or time the main operations.
//
// Exit codes: 0 success (whatever the test decided), 2 usage or configuration
// errors, 3 data errors.

#include "pcm/baselines.hpp"
#include "pcm/core.hpp"
#include "pcm/error.hpp"
#include "pcm/pcm.hpp"
#include "pcm/power.hpp"
#include "pcm/regress.hpp"
#include "pcm/sim.hpp"
#include "pcm/spline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;

int fail(int code, const std::string& message) {
  std::cerr << "pcm: " << message << '\n';
  return code;
}

// Configuration problems are the caller's fault; anything else raised while
// computing comes from the data.
int classify(const pcm::Error& e) {
  if (dynamic_cast<const pcm::ConfigError*>(&e) || dynamic_cast<const pcm::LookupError*>(&e)) {
    return fail(kUsage, e.what());
  }
  return fail(kData, e.what());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

unsigned resolve_threads(unsigned flag) { return flag > 0 ? flag : pcm::default_thread_count(); }

// ---------------------------------------------------------------------------
// test

struct TestOptions {
  std::string data;
  std::string schema;
  std::string method = "pcm";
  std::string reg_g = "ols";
  std::string reg_v = "ols";
  std::string reg_mf = "ols";
  std::string reg_m = "ols";
  std::string reg_x = "ols";
  std::size_t B = 6;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out = "text";
  unsigned threads = 0;
};

struct TestReport {
  std::string method;
  std::size_t n = 0;
  double alpha = 0.05;
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  bool degenerate = false;
  std::vector<pcm::SplitDiagnostics> per_split;
};

nlohmann::ordered_json to_json(const TestReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["n"] = r.n;
  j["alpha"] = r.alpha;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["degenerate"] = r.degenerate;
  j["per_split"] = nlohmann::ordered_json::array();
  for (const auto& s : r.per_split) {
    nlohmann::ordered_json row;
    row["statistic"] = s.statistic;
    row["rho_hat"] = s.rho_hat;
    row["c_hat"] = s.c_hat;
    row["denominator"] = s.denominator;
    row["degenerate"] = s.degenerate;
    row["vhat_floored"] = s.vhat_floored;
    j["per_split"].push_back(row);
  }
  return j;
}

void print_text(const TestReport& r) {
  std::printf("method      %s\n", r.method.c_str());
  std::printf("n           %zu\n", r.n);
  std::printf("statistic   %.6f\n", r.statistic);
  std::printf("p_value     %.6g\n", r.p_value);
  std::printf("reject      %s (alpha = %g)\n", r.reject ? "yes" : "no", r.alpha);
  if (r.degenerate) std::printf("degenerate  yes\n");
  if (r.per_split.empty()) return;
  std::printf("\nsplit  statistic    rho_hat      c_hat        denominator  flags\n");
  for (std::size_t b = 0; b < r.per_split.size(); ++b) {
    const auto& s = r.per_split[b];
    std::printf("%-6zu %-12.6f %-12.6g %-12.6g %-12.6g %s%s\n", b, s.statistic, s.rho_hat,
                s.c_hat, s.denominator, s.degenerate ? "degenerate " : "",
                s.vhat_floored ? "vhat-floored" : "");
  }
}

int cmd_test(const TestOptions& o) {
  // Everything that depends only on flags is checked before the data is read.
  pcm::MethodKind kind;
  pcm::PcmConfig config;
  pcm::RegressorSpec reg_x;
  try {
    kind = pcm::parse_method_kind(o.method);
    config.reg_g = pcm::parse_regressor(o.reg_g);
    if (o.reg_v == "none") {
      config.reg_v.reset();
    } else {
      config.reg_v = pcm::parse_regressor(o.reg_v);
    }
    config.reg_mf = pcm::parse_regressor(o.reg_mf);
    config.reg_m = pcm::parse_regressor(o.reg_m);
    reg_x = pcm::parse_regressor(o.reg_x);
    config.B = kind == pcm::MethodKind::pcm_single ? 1 : o.B;
    config.alpha = o.alpha;
    config.seed = pcm::RngStream(o.seed);
    config.threads = resolve_threads(o.threads);
    config.validate();
  } catch (const pcm::Error& e) {
    return fail(kUsage, e.what());
  }

  std::optional<pcm::Dataset> data;
  try {
    data.emplace(pcm::load_dataset(o.data, pcm::ColumnSchema::parse(o.schema)));
  } catch (const pcm::ParseError& e) {
    return fail(kData, o.data + ": " + e.what());
  } catch (const pcm::Error& e) {
    return fail(kData, o.data + ": " + e.what());
  }

  TestReport report;
  report.n = static_cast<std::size_t>(data->n());
  report.alpha = o.alpha;
  try {
    switch (kind) {
      case pcm::MethodKind::pcm:
      case pcm::MethodKind::pcm_single: {
        const auto r = pcm::pcm_multi(*data, config);
        report.statistic = r.statistic;
        report.p_value = r.p_value;
        report.reject = r.reject;
        report.degenerate = r.degenerate;
        report.per_split = r.per_split;
        break;
      }
      case pcm::MethodKind::spline_pcm: {
        pcm::SplinePcmOptions options;
        options.alpha = o.alpha;
        options.seed = config.seed;
        const auto r = pcm::spline_pcm(*data, options);
        report.statistic = r.statistic;
        report.p_value = r.p_value;
        report.reject = r.reject;
        report.degenerate = r.degenerate;
        report.per_split = r.per_split;
        break;
      }
      case pcm::MethodKind::gcm:
      case pcm::MethodKind::williamson:
      case pcm::MethodKind::wald: {
        const pcm::BaselineResult r =
            kind == pcm::MethodKind::gcm
                ? pcm::gcm_test(*data, reg_x, config.reg_m, o.alpha, config.seed)
            : kind == pcm::MethodKind::williamson
                ? pcm::williamson_test(*data, config.reg_g, config.reg_m, o.alpha, config.seed)
                : pcm::robust_wald_test(*data, o.alpha);
        report.statistic = r.statistic;
        report.p_value = r.p_value;
        report.reject = r.reject;
        break;
      }
    }
  } catch (const pcm::Error& e) {
    return classify(e);
  }
  report.method = pcm::to_string(kind);

  if (o.out == "json") {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    print_text(report);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string scenario;
  std::string methods = "pcm";
  std::string n_grid;
  std::size_t reps = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out = "-";
};

int cmd_simulate(const SimulateOptions& o) {
  pcm::ExperimentSpec spec;
  try {
    for (const auto& name : split_list(o.scenario)) spec.scenarios.push_back(pcm::find_scenario(name));
    if (spec.scenarios.empty()) throw pcm::ConfigError("--scenario names no scenario");
    for (const auto& name : split_list(o.methods)) {
      pcm::MethodSpec m = pcm::default_method(name, spec.scenarios.front());
      m.alpha = o.alpha;
      spec.methods.push_back(m);
    }
    if (spec.methods.empty()) throw pcm::ConfigError("--methods names no method");
    for (const auto& n : split_list(o.n_grid)) {
      std::size_t pos = 0;
      unsigned long long value = 0;
      try {
        value = std::stoull(n, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != n.size() || value == 0) throw pcm::ConfigError("bad --n-grid entry '" + n + "'");
      spec.n_grid.push_back(static_cast<std::size_t>(value));
    }
    if (o.reps == 0) throw pcm::ConfigError("--reps must be at least 1");
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw pcm::ConfigError("--alpha must lie in (0,1)");
  } catch (const pcm::Error& e) {
    return fail(kUsage, e.what());
  }
  spec.reps = o.reps;
  spec.seed = pcm::RngStream(o.seed);
  spec.threads = resolve_threads(o.threads);

  // With several scenarios, each uses its own regressor presets.
  pcm::ExperimentReport report;
  try {
    for (const auto& scenario : spec.scenarios) {
      pcm::ExperimentSpec one = spec;
      one.scenarios = {scenario};
      for (auto& m : one.methods) {
        const pcm::MethodSpec fresh = pcm::default_method(pcm::to_string(m.kind), scenario);
        m.pcm = fresh.pcm;
        m.reg_x = fresh.reg_x;
      }
      auto part = pcm::run_experiment(one);
      report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
    }
  } catch (const pcm::Error& e) {
    return classify(e);
  }
  for (const auto& row : report.rows) {
    if (!row.error.empty()) {
      std::cerr << "pcm: " << row.scenario << " / " << row.method << " / n=" << row.n << ": "
                << row.error << '\n';
    }
  }

  const bool json = o.out.size() >= 5 && o.out.compare(o.out.size() - 5, 5, ".json") == 0;
  const auto format = json ? pcm::ReportFormat::json : pcm::ReportFormat::csv;
  if (o.out == "-") {
    pcm::write_report(std::cout, report, pcm::ReportFormat::csv);
    return 0;
  }
  try {
    pcm::emit_report(report, format, o.out);
  } catch (const pcm::Error& e) {
    return fail(kData, e.what());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// power

int cmd_power(const pcm::LinearPowerParams& p, const std::string& method) {
  try {
    const double psi =
        method == "gcm" ? pcm::gcm_asymptotic_power(p) : pcm::pcm_asymptotic_power(p);
    std::printf("%.10f\n", psi);
  } catch (const pcm::Error& e) {
    return fail(kUsage, e.what());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct Timing {
  std::string operation;
  double seconds;
};

double time_once(const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

pcm::Matrix uniform_matrix(pcm::Index rows, pcm::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif;
  pcm::Matrix m(rows, cols);
  for (pcm::Index i = 0; i < rows; ++i) {
    for (pcm::Index j = 0; j < cols; ++j) m(i, j) = unif(rng);
  }
  return m;
}

std::vector<Timing> bench_regress(pcm::Index n, std::mt19937_64& rng) {
  const pcm::Matrix design = uniform_matrix(n, 6, rng);
  std::normal_distribution<double> normal;
  pcm::Vector y(n);
  for (pcm::Index i = 0; i < n; ++i) y(i) = std::sin(6.0 * design(i, 0)) + design(i, 1) + normal(rng);
  std::vector<Timing> out;
  for (const char* spec : {"ols", "lasso:0.05", "lasso:cv", "sqrtlasso:auto", "spline:r=4,N=8,additive",
                           "forest:trees=50,leaf=5"}) {
    const auto parsed = pcm::parse_regressor(spec);
    out.push_back({std::string("fit ") + spec,
                   time_once([&] { pcm::fit(parsed, design, y, pcm::RngStream(1)); })});
  }
  return out;
}

std::vector<Timing> bench_spline(pcm::Index n, std::mt19937_64& rng) {
  const pcm::Matrix points = uniform_matrix(n, 2, rng);
  const pcm::TensorBasis tb({pcm::BSplineBasis(4, 6), pcm::BSplineBasis(4, 6)});
  pcm::Vector y(n);
  for (pcm::Index i = 0; i < n; ++i) y(i) = std::sin(6.0 * points(i, 0)) * points(i, 1);
  std::vector<Timing> out;
  out.push_back({"basis-eval tensor r=4 N=6 d=2", time_once([&] { tb.design(points); })});
  out.push_back({"regress tensor r=4 N=6 d=2", time_once([&] { pcm::spline_regress(points, y, tb); })});
  const pcm::Vector beta = pcm::Vector::Ones(tb.size());
  out.push_back({"projection-pi x1000", time_once([&] {
                   for (int k = 0; k < 1000; ++k) pcm::projection_pi(beta, 10, 10);
                 })});
  return out;
}

std::vector<Timing> bench_pcm(std::size_t n, unsigned threads) {
  const pcm::Scenario s = pcm::find_scenario("null-6.1-linear");
  const pcm::Dataset data = pcm::generate(s, n, pcm::RngStream(7));
  pcm::PcmConfig config;
  config.seed = pcm::RngStream(8);
  config.threads = threads;
  std::vector<Timing> out;
  pcm::PcmConfig single = config;
  single.B = 1;
  out.push_back({"pcm-single ols", time_once([&] { pcm::pcm_multi(data, single); })});
  out.push_back({"pcm B=6 ols", time_once([&] { pcm::pcm_multi(data, config); })});
  pcm::SplinePcmOptions options;
  options.seed = config.seed;
  const pcm::Dataset small(data.x(), data.y(), data.z().leftCols(1));
  out.push_back({"spline-pcm d_z=1", time_once([&] { pcm::spline_pcm(small, options); })});
  out.push_back({"gcm ols", time_once([&] {
                   pcm::gcm_test(data, pcm::OlsSpec{}, pcm::OlsSpec{}, 0.05, pcm::RngStream(9));
                 })});
  return out;
}

int cmd_bench(const std::string& suite, std::size_t size, unsigned threads) {
  std::mt19937_64 rng(20240101);
  std::vector<Timing> rows;
  try {
    const auto n = static_cast<pcm::Index>(size);
    if (suite == "regress") {
      rows = bench_regress(n, rng);
    } else if (suite == "spline") {
      rows = bench_spline(n, rng);
    } else {
      rows = bench_pcm(size, resolve_threads(threads));
    }
  } catch (const pcm::Error& e) {
    return classify(e);
  }
  std::printf("%-36s %10s %12s\n", "operation", "n", "seconds");
  for (const auto& t : rows) std::printf("%-36s %10zu %12.6f\n", t.operation.c_str(), size, t.seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected covariance measure tests for conditional mean independence"};
  app.require_subcommand(1);

  TestOptions test;
  auto* test_cmd = app.add_subcommand("test", "Run a test of E(Y|X,Z) = E(Y|Z) on a CSV file");
  test_cmd->add_option("--data", test.data, "CSV file with a header row")->required();
  test_cmd->add_option("--schema", test.schema, "Column roles, e.g. \"x=x1;y=y;z=z1..z7\"")->required();
  test_cmd->add_option("--method", test.method)
      ->check(CLI::IsMember({"pcm", "pcm-single", "spline-pcm", "gcm", "williamson", "wald"}))
      ->capture_default_str();
  test_cmd->add_option("--reg-g", test.reg_g, "Y on (X, Z)")->capture_default_str();
  test_cmd->add_option("--reg-v", test.reg_v, "Squared residuals on (X, Z), or none")->capture_default_str();
  test_cmd->add_option("--reg-mf", test.reg_mf, "Projection on Z")->capture_default_str();
  test_cmd->add_option("--reg-m", test.reg_m, "Y on Z")->capture_default_str();
  test_cmd->add_option("--reg-x", test.reg_x, "X on Z (gcm)")->capture_default_str();
  test_cmd->add_option("--B", test.B, "Number of splits")->check(CLI::PositiveNumber)->capture_default_str();
  test_cmd->add_option("--alpha", test.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  test_cmd->add_option("--seed", test.seed)->capture_default_str();
  test_cmd->add_option("--out", test.out)->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  test_cmd->add_option("--threads", test.threads, "Workers for the splits (default: PCM_THREADS)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rejection rates on built-in scenarios");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario name(s), comma separated")->required();
  sim_cmd->add_option("--methods", sim.methods, "Comma-separated methods")->capture_default_str();
  sim_cmd->add_option("--n-grid", sim.n_grid, "Comma-separated sample sizes (default: scenario grid)");
  sim_cmd->add_option("--reps", sim.reps)->capture_default_str();
  sim_cmd->add_option("--alpha", sim.alpha)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Workers (default: PCM_THREADS)");
  sim_cmd->add_option("--out", sim.out, "Output path; .json gives JSON, - is CSV on stdout")
      ->capture_default_str();

  pcm::LinearPowerParams power;
  std::string power_method = "pcm";
  auto* power_cmd = app.add_subcommand("power", "Asymptotic power in the linear model");
  power_cmd->add_option("--beta", power.beta)->capture_default_str();
  power_cmd->add_option("--sigma-beta", power.sigma_beta)->capture_default_str();
  power_cmd->add_option("--sigma-xi-sq", power.sigma_xi_sq)->capture_default_str();
  power_cmd->add_option("--sigma-eps-xi", power.sigma_eps_xi)->capture_default_str();
  power_cmd->add_option("--n1", power.n1)->capture_default_str();
  power_cmd->add_option("--n2", power.n2)->capture_default_str();
  power_cmd->add_option("--alpha", power.alpha)->capture_default_str();
  power_cmd->add_option("--method", power_method)->check(CLI::IsMember({"pcm", "gcm"}))->capture_default_str();

  std::string suite;
  std::size_t size = 1000;
  unsigned bench_threads = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Wall time of the main operations");
  bench_cmd->add_option("--suite", suite)->required()->check(CLI::IsMember({"regress", "spline", "pcm"}));
  bench_cmd->add_option("--size", size)->check(CLI::Range(std::size_t{20}, std::size_t{10000000}))
      ->capture_default_str();
  bench_cmd->add_option("--threads", bench_threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (*test_cmd) return cmd_test(test);
  if (*sim_cmd) return cmd_simulate(sim);
  if (*power_cmd) return cmd_power(power, power_method);
  return cmd_bench(suite, size, bench_threads);
}
