#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace logz {

// Floats are printed with 17 significant digits so re-runs with the same
// config and seed produce byte-identical files.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
    width_ = columns.size();
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw std::runtime_error("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
  }

  void row_strings(const std::vector<std::string>& values) {
    if (values.size() != width_) throw std::runtime_error("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << values[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

// Minimal standalone SVG polyline, enough for quick visual checks; never
// load-bearing.
void write_svg_polyline(const std::string& path, const std::vector<double>& xs,
                        const std::vector<double>& ys, const std::string& title);

}  // namespace logz
