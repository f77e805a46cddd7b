#include "phmc/models.hpp"

#include <cmath>
#include <numbers>

#include "phmc/error.hpp"

namespace phmc {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dims(const PointPotential& G, std::size_t d) {
  if (!G.eval) throw ConfigError("potential", "no potential supplied");
  if (G.dim != d) throw ConfigError("potential", "dimension " + std::to_string(G.dim) +
                                                    " does not match d = " + std::to_string(d));
}

}  // namespace

// ---------------------------------------------------------------------------------------
// TPS

std::vector<double> TpsModel::discrete_eigenvalues(double tau, std::size_t m) {
  const double h = tau / static_cast<double>(m + 1);
  std::vector<double> out(m);
  for (std::size_t k = 1; k <= m; ++k) {
    const double s = std::sin(static_cast<double>(k) * kPi / (2.0 * static_cast<double>(m + 1)));
    out[k - 1] = h * h / (4.0 * s * s);
  }
  return out;
}

double TpsModel::continuum_eigenvalue(double tau, std::size_t k) {
  const double r = tau / (static_cast<double>(k) * kPi);
  return r * r;
}

double TpsModel::continuum_trace(double tau, std::size_t d) {
  return static_cast<double>(d) * tau * tau / 6.0;
}

std::vector<double> TpsModel::laplacian_matrix(double tau, std::size_t m) {
  const double h = tau / static_cast<double>(m + 1);
  const double ih2 = 1.0 / (h * h);
  std::vector<double> A(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    A[i * m + i] = 2.0 * ih2;
    if (i > 0) A[i * m + i - 1] = -ih2;
    if (i + 1 < m) A[i * m + i + 1] = -ih2;
  }
  return A;
}

TpsModel::TpsModel(TpsParams p) : p_(std::move(p)) {
  if (!(p_.tau > 0.0)) throw ConfigError("model.tau", "must be positive");
  if (p_.m < 1) throw ConfigError("model.m", "must be at least 1");
  if (p_.d < 1) throw ConfigError("model.d", "must be at least 1");
  if (p_.a.empty()) p_.a.assign(p_.d, 0.0);
  if (p_.b.empty()) p_.b.assign(p_.d, 0.0);
  if (p_.a.size() != p_.d) throw ConfigError("model.endpoints.start", "must have d entries");
  if (p_.b.size() != p_.d) throw ConfigError("model.endpoints.end", "must have d entries");
  require_dims(p_.G, p_.d);

  const std::size_t m = p_.m, d = p_.d;
  h_ = p_.tau / static_cast<double>(m + 1);
  const auto lam = discrete_eigenvalues(p_.tau, m);
  std::vector<double> ev(m * d);
  std::vector<std::size_t> col(m * d), coord(m * d);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < d; ++i) {
      ev[k * d + i] = lam[k];
      col[k * d + i] = k;
      coord[k * d + i] = i;
    }
  C_ = SpectralOperator(std::move(ev), "tps_covariance");

  std::vector<double> cols(m * m);
  const double norm = std::sqrt(2.0 / static_cast<double>(m + 1));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < m; ++j)
      cols[k * m + j] = norm * std::sin(kPi * static_cast<double>((k + 1) * (j + 1)) /
                                        static_cast<double>(m + 1));
  basis_ = SpectralBasis(m, d, h_, std::move(cols), std::move(col), std::move(coord));
}

void TpsModel::apply_covariance(std::span<const double> g, std::span<double> out) const {
  const std::size_t m = p_.m, d = p_.d;
  if (g.size() != m * d) throw DimensionError("apply_covariance", m * d, g.size());
  if (out.size() != m * d) throw DimensionError("apply_covariance", m * d, out.size());
  // Thomas algorithm for tridiag(-1, 2, -1) y = h^2 g on each coordinate.
  thread_local std::vector<double> cp;
  cp.resize(m);
  const double h2 = h_ * h_;
  for (std::size_t i = 0; i < d; ++i) {
    double c_prev = 0.0, d_prev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double den = 2.0 + c_prev;
      const double c = -1.0 / den;
      const double dj = (h2 * g[j * d + i] + d_prev) / den;
      cp[j] = c;
      out[j * d + i] = dj;
      c_prev = c;
      d_prev = dj;
    }
    for (std::size_t j = m - 1; j-- > 0;) out[j * d + i] -= cp[j] * out[(j + 1) * d + i];
  }
}

double TpsModel::precision_quadratic(std::span<const double> x) const {
  const std::size_t m = p_.m, d = p_.d;
  if (x.size() != m * d) throw DimensionError("precision_quadratic", m * d, x.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      const double xj = x[j * d + i];
      const double l = j > 0 ? x[(j - 1) * d + i] : 0.0;
      const double r = j + 1 < m ? x[(j + 1) * d + i] : 0.0;
      acc += xj * (2.0 * xj - l - r);
    }
  return acc / h_;
}

double TpsModel::potential(std::span<const double> x, std::span<double> grad) const {
  const std::size_t m = p_.m, d = p_.d;
  if (x.size() != m * d) throw DimensionError("potential", m * d, x.size());
  if (p_.G.is_zero) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return 0.0;
  }
  thread_local std::vector<double> u;
  u.resize(d);
  double U = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double s = grid_time(j + 1) / p_.tau;
    for (std::size_t i = 0; i < d; ++i) u[i] = x[j * d + i] + p_.a[i] + s * (p_.b[i] - p_.a[i]);
    std::span<double> gj = grad.empty() ? std::span<double>{} : grad.subspan(j * d, d);
    U += p_.G.eval(u, gj);
  }
  for (double& g : grad) g *= h_;
  return h_ * U;
}

nlohmann::json TpsModel::describe() const {
  return {{"model", "tps"},
          {"tau", p_.tau},
          {"d", p_.d},
          {"m", p_.m},
          {"endpoints", {{"start", p_.a}, {"end", p_.b}}},
          {"potential", {{"name", p_.G.name}, {"params", p_.G.params}}}};
}

// ---------------------------------------------------------------------------------------
// PIMD

double PimdModel::discrete_eigenvalue(double beta, double a, std::size_t m, std::size_t k) {
  const double h = beta / static_cast<double>(m);
  const double s = std::sin(kPi * static_cast<double>(k - 1) / static_cast<double>(m));
  return 1.0 / (a + 4.0 * s * s / (h * h));
}

double PimdModel::continuum_eigenvalue(double beta, double a, std::size_t k) {
  const double w = 2.0 * kPi * static_cast<double>(k - 1) / beta;
  return 1.0 / (a + w * w);
}

double PimdModel::continuum_trace(double beta, double a, std::size_t d) {
  const double r = std::sqrt(a);
  return static_cast<double>(d) * beta / (2.0 * r) / std::tanh(r * beta / 2.0);
}

std::vector<double> PimdModel::precision_matrix(double beta, double a, std::size_t m) {
  const double h = beta / static_cast<double>(m);
  const double ih2 = 1.0 / (h * h);
  std::vector<double> A(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    A[i * m + i] += 2.0 * ih2 + a;
    A[i * m + (i + m - 1) % m] -= ih2;
    A[i * m + (i + 1) % m] -= ih2;
  }
  return A;
}

PimdModel::PimdModel(PimdParams p) : p_(std::move(p)) {
  if (!(p_.beta > 0.0)) throw ConfigError("model.beta", "must be positive");
  if (!(p_.a > 0.0)) throw ConfigError("model.a", "must be positive");
  if (p_.m < 1) throw ConfigError("model.m", "must be at least 1");
  if (p_.d < 1) throw ConfigError("model.d", "must be at least 1");
  require_dims(p_.G, p_.d);

  const std::size_t m = p_.m, d = p_.d;
  h_ = p_.beta / static_cast<double>(m);

  // Columns: constant, then (cos f, sin f) for 1 <= f < m/2, then the alternating mode.
  std::vector<double> cols(m * m);
  std::vector<std::size_t> col_freq(m);
  const double c0 = 1.0 / std::sqrt(static_cast<double>(m));
  const double c1 = std::sqrt(2.0 / static_cast<double>(m));
  std::size_t c = 0;
  for (std::size_t j = 0; j < m; ++j) cols[j] = c0;
  col_freq[c++] = 0;
  std::vector<double> ev;
  std::vector<std::size_t> col_of_mode, coord_of_mode;
  auto add_modes = [&](std::size_t column, std::size_t f) {
    for (std::size_t i = 0; i < d; ++i) {
      ev.push_back(discrete_eigenvalue(p_.beta, p_.a, m, f + 1));
      col_of_mode.push_back(column);
      coord_of_mode.push_back(i);
      freq_.push_back(f);
    }
  };
  add_modes(0, 0);
  for (std::size_t f = 1; 2 * f < m; ++f) {
    for (std::size_t j = 0; j < m; ++j) {
      const double t = 2.0 * kPi * static_cast<double>(f * j) / static_cast<double>(m);
      cols[c * m + j] = c1 * std::cos(t);
      cols[(c + 1) * m + j] = c1 * std::sin(t);
    }
    add_modes(c, f);
    add_modes(c + 1, f);
    c += 2;
  }
  if (m % 2 == 0 && m >= 2) {
    for (std::size_t j = 0; j < m; ++j) cols[c * m + j] = (j % 2 == 0 ? c0 : -c0);
    add_modes(c, m / 2);
    ++c;
  }
  C_ = SpectralOperator(std::move(ev), "pimd_covariance");
  basis_ = SpectralBasis(m, d, h_, std::move(cols), std::move(col_of_mode), std::move(coord_of_mode));
}

void PimdModel::apply_covariance(std::span<const double> g, std::span<double> out) const {
  const std::size_t m = p_.m, d = p_.d;
  if (g.size() != m * d) throw DimensionError("apply_covariance", m * d, g.size());
  if (out.size() != m * d) throw DimensionError("apply_covariance", m * d, out.size());
  if (m < 3) {
    Model::apply_covariance(g, out);
    return;
  }
  // Cyclic system circ(-1, delta, -1) y = h^2 g by Sherman-Morrison around a
  // tridiagonal solve with modified end diagonals.
  const double delta = 2.0 + p_.a * h_ * h_;
  const double gam = -delta;
  thread_local std::vector<double> cp, x, z, rhs;
  cp.resize(m);
  x.resize(m);
  z.resize(m);
  rhs.resize(m);
  auto diag = [&](std::size_t j) {
    if (j == 0) return delta - gam;
    if (j == m - 1) return delta - 1.0 / gam;
    return delta;
  };
  auto solve = [&](std::vector<double>& r, std::vector<double>& y) {
    double c_prev = 0.0, d_prev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double den = diag(j) + (j > 0 ? c_prev : 0.0);
      const double cc = -1.0 / den;
      const double dj = (r[j] + (j > 0 ? d_prev : 0.0)) / den;
      cp[j] = cc;
      y[j] = dj;
      c_prev = cc;
      d_prev = dj;
    }
    for (std::size_t j = m - 1; j-- > 0;) y[j] -= cp[j] * y[j + 1];
  };
  std::fill(rhs.begin(), rhs.end(), 0.0);
  rhs[0] = gam;
  rhs[m - 1] = -1.0;
  solve(rhs, z);
  const double zden = 1.0 + z[0] - z[m - 1] / gam;
  const double h2 = h_ * h_;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < m; ++j) rhs[j] = h2 * g[j * d + i];
    solve(rhs, x);
    const double fact = (x[0] - x[m - 1] / gam) / zden;
    for (std::size_t j = 0; j < m; ++j) out[j * d + i] = x[j] - fact * z[j];
  }
}

double PimdModel::precision_quadratic(std::span<const double> x) const {
  const std::size_t m = p_.m, d = p_.d;
  if (x.size() != m * d) throw DimensionError("precision_quadratic", m * d, x.size());
  const double ih2 = 1.0 / (h_ * h_);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      const double xj = x[j * d + i];
      const double l = x[((j + m - 1) % m) * d + i];
      const double r = x[((j + 1) % m) * d + i];
      acc += xj * ((2.0 * xj - l - r) * ih2 + p_.a * xj);
    }
  return h_ * acc;
}

double PimdModel::potential(std::span<const double> x, std::span<double> grad) const {
  const std::size_t m = p_.m, d = p_.d;
  if (x.size() != m * d) throw DimensionError("potential", m * d, x.size());
  if (p_.G.is_zero) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return 0.0;
  }
  double U = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    std::span<double> gj = grad.empty() ? std::span<double>{} : grad.subspan(j * d, d);
    U += p_.G.eval(x.subspan(j * d, d), gj);
  }
  for (double& g : grad) g *= h_;
  return h_ * U;
}

nlohmann::json PimdModel::describe() const {
  return {{"model", "pimd"},
          {"beta", p_.beta},
          {"a", p_.a},
          {"d", p_.d},
          {"m", p_.m},
          {"potential", {{"name", p_.G.name}, {"params", p_.G.params}}}};
}

// ---------------------------------------------------------------------------------------

namespace {

template <class T>
T required(const nlohmann::json& j, const char* key, const std::string& prefix) {
  if (!j.contains(key)) throw ConfigError(prefix + key, "required field missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(prefix + key, "has the wrong type");
  }
}

PointPotential potential_from(const nlohmann::json& cfg, std::size_t d) {
  if (!cfg.contains("potential")) return potential_library("zero", {}, d);
  const auto& pc = cfg.at("potential");
  if (pc.is_string()) return potential_library(pc.get<std::string>(), {}, d);
  nlohmann::json params = pc.value("params", nlohmann::json::object());
  if (pc.contains("seed")) params["seed"] = pc.at("seed");
  return potential_library(required<std::string>(pc, "name", "model.potential."), params, d);
}

}  // namespace

ModelPtr build_model(const nlohmann::json& cfg) {
  const std::string kind = required<std::string>(cfg, "model", "model.");
  const auto d = cfg.value("d", std::size_t{1});
  const auto m = required<std::size_t>(cfg, "m", "model.");
  if (kind == "tps") {
    TpsParams p;
    p.tau = required<double>(cfg, "tau", "model.");
    p.d = d;
    p.m = m;
    if (cfg.contains("endpoints")) {
      const auto& e = cfg.at("endpoints");
      p.a = e.value("start", std::vector<double>{});
      p.b = e.value("end", std::vector<double>{});
    }
    p.G = potential_from(cfg, d);
    return std::make_shared<TpsModel>(std::move(p));
  }
  if (kind == "pimd") {
    PimdParams p;
    p.beta = required<double>(cfg, "beta", "model.");
    p.a = required<double>(cfg, "a", "model.");
    p.d = d;
    p.m = m;
    p.G = potential_from(cfg, d);
    return std::make_shared<PimdModel>(std::move(p));
  }
  throw ConfigError("model.model", "unknown model '" + kind + "' (expected tps or pimd)");
}

}  // namespace phmc
