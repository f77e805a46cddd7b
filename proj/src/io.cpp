#include "phmc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "phmc/error.hpp"

namespace phmc {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_schema_line(const std::string& schema, int version) {
  return "# phmc-csv " + schema + " v" + std::to_string(version);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema,
                     std::vector<std::string> columns, int version)
    : columns_(std::move(columns)), path_(path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw ConfigError("out", "cannot write " + path.string());
  out_ << csv_schema_line(schema, version) << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw DimensionError("csv row of " + path_.filename().string(), columns_.size(), cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw Error("failed writing " + path_.string());
  out_.close();
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const SvgChart& chart) {
  const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 55;
  const double pw = W - left - right, ph = H - top - bottom;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto ty = [&](double y) { return chart.log_y ? std::log10(y) : y; };
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (chart.log_y && s.y[i] <= 0)) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(chart.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double X = px(fx), Y = top + ph - ph * i / 4.0;
    o << "<line x1=\"" << num(X) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(X) << "\" y2=\""
      << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(X) << "\" y=\"" << num(top + ph + 18)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(fx) << "</text>\n";
    o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(Y) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(Y) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(Y + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">"
      << tick_label(chart.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 12)
    << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(chart.x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
    << "transform=\"rotate(-90 16 " << num(top + ph / 2) << ")\">" << xml_escape(chart.y_label)
    << "</text>\n";
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (chart.log_y && s.y[i] <= 0)) continue;
      o << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 12 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
      << num(left + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(left + pw + 38) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
      << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const SvgChart& chart) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("out", "cannot write " + path.string());
  out << render_svg(chart);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("out", "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!std::filesystem::exists(dir_, ec)) {
    if (!std::filesystem::create_directories(dir_, ec) || ec)
      throw ConfigError("out", "cannot create directory " + dir_.string());
    created_dir_ = true;
  } else if (!std::filesystem::is_directory(dir_, ec)) {
    throw ConfigError("out", dir_.string() + " is not a directory");
  }
}

std::filesystem::path OutputSet::file(const std::string& name) {
  auto p = dir_ / name;
  files_.push_back(p);
  return p;
}

void OutputSet::discard() {
  std::error_code ec;
  for (const auto& f : files_) std::filesystem::remove(f, ec);
  files_.clear();
  if (created_dir_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
}

}  // namespace phmc
