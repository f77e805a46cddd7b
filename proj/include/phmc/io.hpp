#pragma once

// Output helpers for the experiment runner: versioned CSV tables, a dependency-free SVG
// line chart, and a tracker that removes partially written outputs on failure.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace phmc {

/// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan" for
/// non-finite values).
std::string format_double(double x);

/// CSV table whose first line is "# phmc-csv <schema> v<version>", followed by the
/// header row. Values are written with format_double.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema,
            std::vector<std::string> columns, int version = 1);

  const std::vector<std::string>& columns() const { return columns_; }

  /// A row of already formatted cells; its length must match the header.
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& values);
  void close();

 private:
  std::ofstream out_;
  std::vector<std::string> columns_;
  std::filesystem::path path_;
};

/// Header line written by CsvWriter for a schema.
std::string csv_schema_line(const std::string& schema, int version = 1);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<SvgSeries> series;
};

/// Renders a line chart with axes, ticks and a legend as a standalone SVG document.
std::string render_svg(const SvgChart& chart);
void write_svg(const std::filesystem::path& path, const SvgChart& chart);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Records every file an experiment creates; `discard` deletes them all.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  /// Path of `name` inside the output directory, registered for cleanup.
  std::filesystem::path file(const std::string& name);
  const std::vector<std::filesystem::path>& files() const { return files_; }
  void discard();

 private:
  std::filesystem::path dir_;
  bool created_dir_ = false;
  std::vector<std::filesystem::path> files_;
};

}  // namespace phmc
