#include "phmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phmc/error.hpp"

namespace phmc {

void AlphaNorm::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  if (C.dimension() != Ctilde.dimension())
    throw DimensionError("AlphaNorm", C.dimension(), Ctilde.dimension());
  if (split.n > C.dimension()) throw ConfigError("split.n", "exceeds the dimension");
}

double alpha_norm(std::span<const double> x, const AlphaNorm& cfg) {
  if (x.size() != cfg.C.dimension()) throw DimensionError("alpha_norm", cfg.C.dimension(), x.size());
  const std::size_t n = std::min(cfg.split.n, x.size());
  const double s = cfg.s.value();
  double lo = 0.0, hi = 0.0;
  for (std::size_t j = 0; j < n; ++j) lo += x[j] * x[j] / cfg.Ctilde[j];
  for (std::size_t j = n; j < x.size(); ++j)
    hi += (s == 0.0 ? 1.0 : std::pow(cfg.C[j], -s)) * x[j] * x[j];
  return std::sqrt(lo) + cfg.alpha * std::sqrt(hi);
}

double alpha_norm(const SpectralVector& x, const AlphaNorm& cfg) {
  if (x.representation() != Representation::eigen)
    throw ConfigError("alpha_norm", "vector must be in eigen coordinates");
  return alpha_norm(x.coefficients(), cfg);
}

std::pair<double, double> sigma_bounds(const AlphaNorm& cfg) {
  const std::size_t n = cfg.split.n;
  if (n == 0) throw ConfigError("split.n", "sigma bounds need at least one low mode");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = std::sqrt(std::pow(cfg.C[j], cfg.s.value()) / cfg.Ctilde[j]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

void SemimetricParams::validate() const {
  if (!(a > 0.0)) throw ConfigError("a", "must be positive");
  if (!(R > 0.0)) throw ConfigError("R", "must be positive");
  if (!(eps >= 0.0)) throw ConfigError("eps", "must be non-negative");
}

double f_eval(double r, const SemimetricParams& p) {
  if (!(r >= 0.0)) throw ConfigError("r", "must be non-negative");
  return -std::expm1(-p.a * std::min(r, p.R)) / p.a;
}

double f_left_derivative(double r, const SemimetricParams& p) {
  if (!(r >= 0.0)) throw ConfigError("r", "must be non-negative");
  return r <= p.R ? std::exp(-p.a * r) : 0.0;
}

double semimetric_rho(std::span<const double> x, std::span<const double> y, const AlphaNorm& cfg,
                      const SemimetricParams& params) {
  if (x.size() != y.size()) throw DimensionError("semimetric_rho", x.size(), y.size());
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] - y[j];
  const double r = alpha_norm(z, cfg);
  double nx = 0.0, ny = 0.0;
  const double s = cfg.s.value();
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double w = s == 0.0 ? 1.0 : std::pow(cfg.C[j], -s);
    nx += w * x[j] * x[j];
    ny += w * y[j] * y[j];
  }
  return std::sqrt(f_eval(r, params) * (1.0 + params.eps * nx + params.eps * ny));
}

double semimetric_rho(const SpectralVector& x, const SpectralVector& y, const AlphaNorm& cfg,
                      const SemimetricParams& params) {
  if (x.representation() != Representation::eigen || y.representation() != Representation::eigen)
    throw ConfigError("semimetric_rho", "vectors must be in eigen coordinates");
  return semimetric_rho(x.coefficients(), y.coefficients(), cfg, params);
}

double decay_slope(const std::vector<DecayPoint>& series) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& p : series) {
    if (!(p.mean_distance > 0.0)) continue;
    const double x = static_cast<double>(p.step);
    const double y = std::log(p.mean_distance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (dn * sxy - sx * sy) / den;
}

double sorted_w1(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw DimensionError("sorted_w1", a.size(), b.size());
  if (a.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_statistic", "samples must be non-empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n1, std::size_t n2, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double a = static_cast<double>(n1), b = static_cast<double>(n2);
  return c * std::sqrt((a + b) / (a * b));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace phmc
