#include "pcm/core.hpp"
#include "pcm/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace pcm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// "z1..z7" -> z1, ..., z7; anything else is a literal column name.
void expand_token(std::string_view token, std::vector<std::string>& out) {
  const auto dots = token.find("..");
  if (dots == std::string_view::npos) {
    out.emplace_back(token);
    return;
  }
  const auto lhs = token.substr(0, dots);
  const auto rhs = token.substr(dots + 2);
  auto digits_at = [](std::string_view s) {
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
    return i;
  };
  const auto lcut = digits_at(lhs);
  const auto rcut = digits_at(rhs);
  if (lcut == lhs.size() || rcut == rhs.size() || lhs.substr(0, lcut) != rhs.substr(0, rcut)) {
    throw SchemaError("malformed column range '" + std::string(token) + "'");
  }
  int from = 0;
  int to = 0;
  std::from_chars(lhs.data() + lcut, lhs.data() + lhs.size(), from);
  std::from_chars(rhs.data() + rcut, rhs.data() + rhs.size(), to);
  if (to < from) {
    throw SchemaError("empty column range '" + std::string(token) + "'");
  }
  const std::string prefix(lhs.substr(0, lcut));
  for (int i = from; i <= to; ++i) out.push_back(prefix + std::to_string(i));
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

ColumnSchema ColumnSchema::parse(std::string_view text) {
  ColumnSchema schema;
  bool seen_x = false;
  bool seen_y = false;
  for (auto group : split_on(text, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    const auto eq = group.find('=');
    if (eq == std::string_view::npos) {
      throw SchemaError("schema group '" + std::string(group) + "' lacks '='");
    }
    const auto key = trim(group.substr(0, eq));
    std::vector<std::string> cols;
    for (auto tok : split_on(group.substr(eq + 1), ',')) {
      tok = trim(tok);
      if (!tok.empty()) expand_token(tok, cols);
    }
    if (key == "x") {
      schema.x = std::move(cols);
      seen_x = true;
    } else if (key == "y") {
      if (cols.size() != 1) throw SchemaError("schema group y must name exactly one column");
      schema.y = cols.front();
      seen_y = true;
    } else if (key == "z") {
      schema.z = std::move(cols);
    } else {
      throw SchemaError("unknown schema group '" + std::string(key) + "'");
    }
  }
  if (!seen_x || schema.x.empty()) throw SchemaError("schema must name at least one x column");
  if (!seen_y) throw SchemaError("schema must name a y column");
  return schema;
}

ColumnSchema ColumnSchema::default_for(Index d_x, Index d_z) {
  ColumnSchema s;
  for (Index j = 1; j <= d_x; ++j) s.x.push_back("x" + std::to_string(j));
  s.y = "y";
  for (Index j = 1; j <= d_z; ++j) s.z.push_back("z" + std::to_string(j));
  return s;
}

std::string ColumnSchema::to_string() const {
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  };
  return "x=" + join(x) + ";y=" + y + ";z=" + join(z);
}

Dataset read_dataset(std::istream& in, const ColumnSchema& schema) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw InvalidArgument("input is empty");
  }

  std::map<std::string, std::size_t, std::less<>> header;
  {
    std::size_t idx = 0;
    for (auto name : split_on(line, ',')) header.emplace(std::string(trim(name)), idx++);
  }
  const std::size_t width = header.size();

  auto column_of = [&](const std::string& name) {
    const auto it = header.find(name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return it->second;
  };
  std::vector<std::size_t> xcols;
  std::vector<std::size_t> zcols;
  for (const auto& c : schema.x) xcols.push_back(column_of(c));
  const std::size_t ycol = column_of(schema.y);
  for (const auto& c : schema.z) zcols.push_back(column_of(c));

  std::vector<std::vector<double>> rows;
  std::vector<double> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto parts = split_on(line, ',');
    if (parts.size() != width) {
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(width) +
                           " fields, found " + std::to_string(parts.size()),
                       row);
    }
    cells.assign(width, 0.0);
    for (std::size_t c = 0; c < width; ++c) {
      const auto field = trim(parts[c]);
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric cell '" +
                             std::string(field) + "'",
                         row);
      }
      if (!std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ": non-finite cell '" +
                             std::string(field) + "'",
                         row);
      }
      cells[c] = v;
    }
    rows.push_back(cells);
    ++row;
  }
  if (rows.empty()) throw InvalidArgument("input has a header but no data rows");

  const auto n = static_cast<Index>(rows.size());
  Matrix x(n, static_cast<Index>(xcols.size()));
  Vector y(n);
  Matrix z(n, static_cast<Index>(zcols.size()));
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < xcols.size(); ++j) x(i, static_cast<Index>(j)) = r[xcols[j]];
    y(i) = r[ycol];
    for (std::size_t j = 0; j < zcols.size(); ++j) z(i, static_cast<Index>(j)) = r[zcols[j]];
  }
  return Dataset(std::move(x), std::move(y), std::move(z));
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return read_dataset(in, schema);
}

void write_dataset(std::ostream& out, const Dataset& data, const ColumnSchema& schema) {
  if (static_cast<Index>(schema.x.size()) != data.d_x() ||
      static_cast<Index>(schema.z.size()) != data.d_z()) {
    throw SchemaError("schema does not match dataset dimensions");
  }
  std::string header;
  for (const auto& c : schema.x) header += c + ",";
  header += schema.y;
  for (const auto& c : schema.z) header += "," + c;
  out << header << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    std::string line;
    for (Index j = 0; j < data.d_x(); ++j) line += format_double(data.x()(i, j)) + ",";
    line += format_double(data.y()(i));
    for (Index j = 0; j < data.d_z(); ++j) line += "," + format_double(data.z()(i, j));
    out << line << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data,
                  const ColumnSchema& schema) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  write_dataset(out, data, schema);
}

}  // namespace pcm
