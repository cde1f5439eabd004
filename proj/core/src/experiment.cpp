#include "pcm/baselines.hpp"
#include "pcm/error.hpp"
#include "pcm/sim.hpp"

#include <chrono>
#include <cmath>

namespace pcm {

namespace {

// FNV-1a, so scenario streams do not depend on the standard library's hash.
std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct MethodEntry {
  MethodKind kind;
  const char* name;
};

constexpr MethodEntry kMethods[] = {
    {MethodKind::pcm, "pcm"},           {MethodKind::pcm_single, "pcm-single"},
    {MethodKind::spline_pcm, "spline-pcm"}, {MethodKind::gcm, "gcm"},
    {MethodKind::williamson, "williamson"}, {MethodKind::wald, "wald"},
};

}  // namespace

MethodKind parse_method_kind(std::string_view name) {
  for (const auto& m : kMethods) {
    if (name == m.name) return m.kind;
  }
  std::string valid;
  for (const auto& m : kMethods) valid += (valid.empty() ? "" : ", ") + std::string(m.name);
  throw LookupError("unknown method '" + std::string(name) + "'; valid methods: " + valid);
}

std::string to_string(MethodKind kind) {
  for (const auto& m : kMethods) {
    if (m.kind == kind) return m.name;
  }
  return "unknown";
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (const auto& m : kMethods) out.emplace_back(m.name);
  return out;
}

RegressorPreset preset_for(const Scenario& scenario) {
  switch (scenario.family) {
    case ScenarioFamily::additive: {
      const RegressorSpec xz = parse_regressor("spline:r=4,N=32,additive,cols=0+1,pen");
      return {xz, parse_regressor("spline:r=4,N=32,additive,cols=0,pen"), xz};
    }
    case ScenarioFamily::forest: {
      const RegressorSpec forest = parse_regressor("forest:trees=100,leaf=5");
      return {forest, forest, forest};
    }
    case ScenarioFamily::linear:
      break;
  }
  RegressorPreset preset{OlsSpec{}, OlsSpec{}, RegressorSpec{OlsSpec{}}};
  if (scenario.name.starts_with("linear-power")) preset.variance.reset();
  if (scenario.name.starts_with("linear-F.1")) {
    preset.variance = parse_regressor("forest:trees=100,leaf=5");
  }
  return preset;
}

MethodSpec default_method(std::string_view method, const Scenario& scenario) {
  MethodSpec spec;
  spec.kind = parse_method_kind(method);
  spec.label = to_string(spec.kind);
  const RegressorPreset preset = preset_for(scenario);
  spec.pcm.reg_g = preset.on_xz;
  spec.pcm.reg_v = preset.variance;
  spec.pcm.reg_mf = preset.on_z;
  spec.pcm.reg_m = preset.on_z;
  spec.pcm.B = spec.kind == MethodKind::pcm_single ? 1 : 6;
  spec.reg_x = preset.on_z;
  return spec;
}

MethodOutcome run_method(const MethodSpec& method, const Dataset& data, const RngStream& seed) {
  auto from_test = [](const TestResult& r) {
    return MethodOutcome{r.statistic, r.p_value, r.reject, r.degenerate};
  };
  auto from_baseline = [](const BaselineResult& r) {
    return MethodOutcome{r.statistic, r.p_value, r.reject, false};
  };
  switch (method.kind) {
    case MethodKind::pcm:
    case MethodKind::pcm_single: {
      PcmConfig config = method.pcm;
      config.seed = seed;
      config.alpha = method.alpha;
      if (method.kind == MethodKind::pcm_single) config.B = 1;
      return from_test(pcm_multi(data, config));
    }
    case MethodKind::spline_pcm: {
      SplinePcmOptions options = method.spline;
      options.seed = seed;
      options.alpha = method.alpha;
      return from_test(spline_pcm(data, options));
    }
    case MethodKind::gcm:
      return from_baseline(gcm_test(data, method.reg_x, method.pcm.reg_m, method.alpha, seed));
    case MethodKind::williamson:
      return from_baseline(
          williamson_test(data, method.pcm.reg_g, method.pcm.reg_m, method.alpha, seed));
    case MethodKind::wald:
      return from_baseline(robust_wald_test(data, method.alpha));
  }
  throw InvalidArgument("run_method: unknown method kind");
}

RngStream replication_stream(const RngStream& seed, std::string_view scenario, std::size_t n,
                             std::size_t rep) {
  return seed.derive(stable_hash(scenario)).derive(n).derive(rep);
}

std::vector<MethodOutcome> replicate(const Scenario& scenario, const MethodSpec& method,
                                     std::size_t n, std::size_t reps, const RngStream& seed,
                                     unsigned threads) {
  std::vector<MethodOutcome> out(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const RngStream stream = replication_stream(seed, scenario.name, n, r);
    const Dataset data = generate(scenario, n, stream.derive(0));
    out[r] = run_method(method, data, stream.derive(1));
  });
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.reps < 1) throw InvalidArgument("run_experiment: reps must be at least 1");
  ExperimentReport report;
  for (const auto& scenario : spec.scenarios) {
    const auto& grid = spec.n_grid.empty() ? scenario.default_n_grid : spec.n_grid;
    for (std::size_t n : grid) {
      for (const auto& method : spec.methods) {
        ReportRow row;
        row.scenario = scenario.name;
        row.method = method.label;
        row.n = n;
        row.reps = spec.reps;
        const auto start = std::chrono::steady_clock::now();
        try {
          const auto outcomes = replicate(scenario, method, n, spec.reps, spec.seed, spec.threads);
          std::size_t rejections = 0;
          for (const auto& o : outcomes) rejections += o.reject ? 1 : 0;
          const double rate = static_cast<double>(rejections) / static_cast<double>(spec.reps);
          row.rejection_rate = rate;
          row.mc_stderr = std::sqrt(rate * (1.0 - rate) / static_cast<double>(spec.reps));
        } catch (const Error& e) {
          row.error = e.what();
        }
        row.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace pcm
