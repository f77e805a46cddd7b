#include "phmc/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "phmc/error.hpp"

namespace phmc {

std::uint64_t RngStream::geometric(double p) {
  if (!(p > 0.0)) throw ConfigError("p", "geometric success probability must be positive");
  const double u = uniform();
  if (p >= 1.0) return 1;
  // P(k > j) = (1-p)^j; k = 1 + floor(log(u) / log(1-p)).
  const double j = std::floor(std::log(u) / std::log1p(-p));
  return 1 + static_cast<std::uint64_t>(j);
}

std::string to_string(Representation r) {
  return r == Representation::grid ? "grid" : "eigen";
}

Representation representation_from_string(const std::string& s) {
  if (s == "grid") return Representation::grid;
  if (s == "eigen") return Representation::eigen;
  throw ConfigError("representation", "unknown representation '" + s + "'");
}

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues, std::string label)
    : eigenvalues_(std::move(eigenvalues)), label_(std::move(label)) {
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    if (!(eigenvalues_[i] > 0.0) || !std::isfinite(eigenvalues_[i]))
      throw ConfigError("eigenvalues[" + std::to_string(i) + "]", "must be positive and finite");
    if (i > 0 && eigenvalues_[i] > eigenvalues_[i - 1])
      throw ConfigError("eigenvalues[" + std::to_string(i) + "]", "eigenvalues must be non-increasing");
  }
}

double SpectralOperator::trace() const {
  double t = 0.0;
  for (double l : eigenvalues_) t += l;
  return t;
}

SpectralOperator SpectralOperator::power(double p) const {
  std::vector<double> out(eigenvalues_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(eigenvalues_[i], p);
  // p < 0 reverses the order; keep the mode indexing and skip the ordering check.
  SpectralOperator r;
  r.eigenvalues_ = std::move(out);
  r.label_ = label_;
  return r;
}

SpectralVector::SpectralVector(std::vector<double> coefficients, double weight, Representation rep)
    : coefficients_(std::move(coefficients)), weight_(weight), rep_(rep) {
  if (!(weight_ > 0.0)) throw ConfigError("weight", "must be positive");
}

static void require_same(const SpectralVector& x, const SpectralVector& y, const char* what) {
  if (x.size() != y.size()) throw DimensionError(what, x.size(), y.size());
  if (x.representation() != y.representation())
    throw ConfigError(what, "representation mismatch");
}

double inner(const SpectralVector& x, const SpectralVector& y) {
  require_same(x, y, "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return x.representation() == Representation::grid ? x.weight() * acc : acc;
}

SpectralVector operator-(const SpectralVector& x, const SpectralVector& y) {
  require_same(x, y, "operator-");
  SpectralVector r = x;
  for (std::size_t i = 0; i < x.size(); ++i) r[i] -= y[i];
  return r;
}

SpectralVector operator+(const SpectralVector& x, const SpectralVector& y) {
  require_same(x, y, "operator+");
  SpectralVector r = x;
  for (std::size_t i = 0; i < x.size(); ++i) r[i] += y[i];
  return r;
}

SobolevIndex::SobolevIndex(double s) : s_(s) {
  if (!(s < 1.0)) throw ConfigError("s", "Sobolev index must satisfy s < 1");
}

static void require_eigen(const SpectralVector& x, const SpectralOperator& C, const char* what) {
  if (x.representation() != Representation::eigen)
    throw ConfigError(what, "vector must be in eigen coordinates");
  if (x.size() != C.dimension()) throw DimensionError(what, C.dimension(), x.size());
}

double hs_inner(const SpectralVector& x, const SpectralVector& y, const SpectralOperator& C,
                SobolevIndex s) {
  require_eigen(x, C, "hs_inner");
  require_eigen(y, C, "hs_inner");
  const double sv = s.value();
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double w = sv == 0.0 ? 1.0 : std::pow(C[j], -sv);
    acc += w * x[j] * y[j];
  }
  return acc;
}

double hs_norm_squared(const SpectralVector& x, const SpectralOperator& C, SobolevIndex s) {
  return hs_inner(x, x, C, s);
}

double hs_norm(const SpectralVector& x, const SpectralOperator& C, SobolevIndex s) {
  return std::sqrt(hs_inner(x, x, C, s));
}

void sample_gaussian(const SpectralOperator& C, RngStream& rng, std::span<double> out) {
  if (out.size() != C.dimension()) throw DimensionError("sample_gaussian", C.dimension(), out.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::sqrt(C[j]) * rng.normal();
}

SpectralVector sample_gaussian(const SpectralOperator& C, RngStream& rng) {
  SpectralVector v = SpectralVector::zeros(C.dimension(), 1.0, Representation::eigen);
  sample_gaussian(C, rng, v.coefficients());
  return v;
}

double weighted_trace(const SpectralOperator& Ctilde, const SpectralOperator& C, SobolevIndex s) {
  if (Ctilde.dimension() != C.dimension())
    throw DimensionError("weighted_trace", C.dimension(), Ctilde.dimension());
  double t = 0.0;
  for (std::size_t j = 0; j < C.dimension(); ++j)
    t += Ctilde[j] * (s.value() == 0.0 ? 1.0 : std::pow(C[j], -s.value()));
  return t;
}

std::pair<SpectralVector, SpectralVector> split(const SpectralVector& x, ModeSplit sp) {
  if (sp.n < 1 || sp.n > x.size())
    throw ConfigError("split.n", "must satisfy 1 <= n <= " + std::to_string(x.size()));
  SpectralVector low = x;
  SpectralVector high = x;
  for (std::size_t j = 0; j < x.size(); ++j) (j < sp.n ? high[j] : low[j]) = 0.0;
  return {std::move(low), std::move(high)};
}

SpectralBasis SpectralBasis::identity(std::size_t n) {
  SpectralBasis b;
  b.points_ = n;
  b.block_ = 1;
  b.weight_ = 1.0;
  b.identity_ = true;
  return b;
}

SpectralBasis::SpectralBasis(std::size_t points, std::size_t block, double weight,
                             std::vector<double> columns, std::vector<std::size_t> column_of_mode,
                             std::vector<std::size_t> coord_of_mode)
    : points_(points),
      block_(block),
      weight_(weight),
      columns_(std::move(columns)),
      column_of_mode_(std::move(column_of_mode)),
      coord_of_mode_(std::move(coord_of_mode)) {
  if (columns_.size() != points_ * points_)
    throw DimensionError("SpectralBasis columns", points_ * points_, columns_.size());
  if (column_of_mode_.size() != dimension() || coord_of_mode_.size() != dimension())
    throw DimensionError("SpectralBasis mode map", dimension(), column_of_mode_.size());
  if (!(weight_ > 0.0)) throw ConfigError("weight", "must be positive");
}

void SpectralBasis::to_eigen(std::span<const double> grid, std::span<double> eigen) const {
  const std::size_t n = dimension();
  if (grid.size() != n) throw DimensionError("to_eigen", n, grid.size());
  if (eigen.size() != n) throw DimensionError("to_eigen", n, eigen.size());
  if (identity_) {
    std::copy(grid.begin(), grid.end(), eigen.begin());
    return;
  }
  const double scale = std::sqrt(weight_);
  for (std::size_t e = 0; e < n; ++e) {
    const double* col = &columns_[column_of_mode_[e] * points_];
    const std::size_t coord = coord_of_mode_[e];
    double acc = 0.0;
    for (std::size_t j = 0; j < points_; ++j) acc += col[j] * grid[j * block_ + coord];
    eigen[e] = scale * acc;
  }
}

void SpectralBasis::to_grid(std::span<const double> eigen, std::span<double> grid) const {
  const std::size_t n = dimension();
  if (grid.size() != n) throw DimensionError("to_grid", n, grid.size());
  if (eigen.size() != n) throw DimensionError("to_grid", n, eigen.size());
  if (identity_) {
    std::copy(eigen.begin(), eigen.end(), grid.begin());
    return;
  }
  std::fill(grid.begin(), grid.end(), 0.0);
  const double scale = 1.0 / std::sqrt(weight_);
  for (std::size_t e = 0; e < n; ++e) {
    const double c = scale * eigen[e];
    if (c == 0.0) continue;
    const double* col = &columns_[column_of_mode_[e] * points_];
    const std::size_t coord = coord_of_mode_[e];
    for (std::size_t j = 0; j < points_; ++j) grid[j * block_ + coord] += c * col[j];
  }
}

SpectralVector SpectralBasis::to_eigen(const SpectralVector& x) const {
  if (x.representation() == Representation::eigen) return x;
  SpectralVector out = SpectralVector::zeros(x.size(), x.weight(), Representation::eigen);
  to_eigen(x.coefficients(), out.coefficients());
  return out;
}

SpectralVector SpectralBasis::to_grid(const SpectralVector& x) const {
  if (x.representation() == Representation::grid) return x;
  SpectralVector out = SpectralVector::zeros(x.size(), weight_, Representation::grid);
  to_grid(x.coefficients(), out.coefficients());
  return out;
}

nlohmann::json encode_double(double x, bool hex) {
  if (!hex) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return std::string(buf);
}

double decode_double(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError("", "not a number: '" + s + "'");
    return v;
  }
  throw ConfigError("", "expected a number or a hexadecimal float string");
}

static nlohmann::json encode_array(std::span<const double> xs, bool hex) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : xs) a.push_back(encode_double(x, hex));
  return a;
}

nlohmann::json to_json(const SpectralOperator& op, bool hex_floats) {
  return {{"label", op.label()},
          {"eigenvalues", encode_array(op.eigenvalues(), hex_floats)},
          {"encoding", hex_floats ? "hex" : "decimal"}};
}

nlohmann::json to_json(const SpectralVector& v, bool hex_floats) {
  return {{"coefficients", encode_array(v.coefficients(), hex_floats)},
          {"weight", encode_double(v.weight(), hex_floats)},
          {"representation", to_string(v.representation())},
          {"encoding", hex_floats ? "hex" : "decimal"}};
}

SpectralOperator operator_from_json(const nlohmann::json& j) {
  std::vector<double> ev;
  for (const auto& x : j.at("eigenvalues")) ev.push_back(decode_double(x));
  return SpectralOperator(std::move(ev), j.value("label", std::string{}));
}

SpectralVector vector_from_json(const nlohmann::json& j) {
  std::vector<double> c;
  for (const auto& x : j.at("coefficients")) c.push_back(decode_double(x));
  return SpectralVector(std::move(c), decode_double(j.at("weight")),
                        representation_from_string(j.at("representation").get<std::string>()));
}

}  // namespace phmc
