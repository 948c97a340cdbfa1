#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kwvortex/error.hpp"

namespace kwv {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw DomainError("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                        std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }
};

// Two columns for gnuplot.
struct Series {
  std::string name;
  std::string x_label, y_label;
  std::vector<std::pair<double, double>> points;
};

struct Report {
  nlohmann::ordered_json config_echo;
  nlohmann::ordered_json metadata;  // grid hash, scheme, K and k_coeff per s, ...
  nlohmann::ordered_json summary;
  std::vector<Table> tables;
  std::vector<Series> series;
};

// 17 significant digits, enough to round-trip a double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += "\n";
  }
  return out;
}

inline std::string series_dat(const Series& s) {
  std::string out = "# " + s.x_label + " " + s.y_label + "\n";
  for (const auto& [x, y] : s.points) out += format_double(x) + " " + format_double(y) + "\n";
  return out;
}

namespace report_detail {
inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(p.string() + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw IoError(p.string() + ": write failed");
}
}  // namespace report_detail

// Writes <dir>/<table>.csv, <dir>/<series>.dat, summary.json and config_echo.json.
inline void write_report(const Report& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create output directory: " + ec.message());
  if (!fs::is_directory(dir)) throw IoError(dir + ": not a directory");
  for (const auto& t : r.tables) report_detail::write_file(fs::path(dir) / (t.name + ".csv"), table_csv(t));
  for (const auto& s : r.series) report_detail::write_file(fs::path(dir) / (s.name + ".dat"), series_dat(s));
  nlohmann::ordered_json summary;
  summary["metadata"] = r.metadata;
  summary["summary"] = r.summary;
  report_detail::write_file(fs::path(dir) / "summary.json", summary.dump(2) + "\n");
  report_detail::write_file(fs::path(dir) / "config_echo.json", r.config_echo.dump(2) + "\n");
}

}  // namespace kwv
