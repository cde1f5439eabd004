#include "pcm/error.hpp"
#include "pcm/sim.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <ostream>

namespace pcm {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void write_report(std::ostream& out, const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    out << "scenario,method,n,reps,rejection_rate,mc_stderr,wall_time_s\n";
    for (const auto& r : report.rows) {
      out << csv_field(r.scenario) << ',' << csv_field(r.method) << ',' << r.n << ',' << r.reps
          << ',' << (r.rejection_rate ? shortest(*r.rejection_rate) : "NA") << ','
          << (r.mc_stderr ? shortest(*r.mc_stderr) : "NA") << ',' << shortest(r.wall_time_s)
          << '\n';
    }
    return;
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"scenario", r.scenario},
                          {"method", r.method},
                          {"n", r.n},
                          {"reps", r.reps},
                          {"rejection_rate", optional_number(r.rejection_rate)},
                          {"mc_stderr", optional_number(r.mc_stderr)},
                          {"wall_time_s", r.wall_time_s}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  out << nlohmann::json{{"rows", rows}}.dump(2) << '\n';
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open report file '" + path.string() + "' for writing");
  write_report(out, report, format);
  out.flush();
  if (!out) throw Error("failed writing report file '" + path.string() + "'");
}

ExperimentReport read_report_json(std::istream& in) {
  ExperimentReport report;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& j : doc.at("rows")) {
      ReportRow r;
      r.scenario = j.at("scenario").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.n = j.at("n").get<std::size_t>();
      r.reps = j.at("reps").get<std::size_t>();
      r.rejection_rate = read_optional(j.at("rejection_rate"));
      r.mc_stderr = read_optional(j.at("mc_stderr"));
      r.wall_time_s = j.at("wall_time_s").get<double>();
      if (j.contains("error")) r.error = j.at("error").get<std::string>();
      report.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report json: ") + e.what(), 0);
  }
  return report;
}

}  // namespace pcm
