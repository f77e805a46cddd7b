#include "phmc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phmc/error.hpp"

namespace phmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(std::span<const double> u) {
  double a = 0.0;
  for (double x : u) a += x * x;
  return a;
}

std::vector<std::vector<double>> read_points(const nlohmann::json& j, std::size_t dim,
                                             const std::string& field) {
  std::vector<std::vector<double>> pts;
  for (const auto& p : j) {
    std::vector<double> v;
    if (p.is_number()) {
      v.push_back(p.get<double>());
    } else {
      for (const auto& c : p) v.push_back(c.get<double>());
    }
    if (v.size() != dim) throw ConfigError(field, "each point must have dimension " + std::to_string(dim));
    pts.push_back(std::move(v));
  }
  if (pts.empty()) throw ConfigError(field, "at least one component is required");
  return pts;
}

// Means either listed explicitly or drawn uniformly in a box from a seeded stream.
std::vector<std::vector<double>> mixture_means(const nlohmann::json& p, std::size_t dim) {
  if (p.contains("means")) return read_points(p.at("means"), dim, "potential.params.means");
  const auto count = p.value("components", std::size_t{20});
  const auto seed = p.value("seed", std::uint64_t{1});
  double lo = 0.0, hi = 10.0;
  if (p.contains("box")) {
    lo = p.at("box").at(0).get<double>();
    hi = p.at("box").at(1).get<double>();
  }
  if (!(hi > lo)) throw ConfigError("potential.params.box", "need lo < hi");
  if (count == 0) throw ConfigError("potential.params.components", "must be positive");
  RngStream rng(derive_seed(seed, {0x6d6978ULL}));
  std::vector<std::vector<double>> means(count, std::vector<double>(dim));
  for (auto& m : means)
    for (double& x : m) x = lo + (hi - lo) * rng.uniform();
  return means;
}

std::vector<double> mixture_weights(const nlohmann::json& p, std::size_t count) {
  std::vector<double> w(count, 1.0 / static_cast<double>(count));
  if (p.contains("weights")) {
    w = p.at("weights").get<std::vector<double>>();
    if (w.size() != count) throw ConfigError("potential.params.weights", "length must match the means");
    double s = 0.0;
    for (double x : w) {
      if (!(x > 0.0)) throw ConfigError("potential.params.weights", "must be positive");
      s += x;
    }
    for (double& x : w) x /= s;
  }
  return w;
}

double diameter(const std::vector<std::vector<double>>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = i + 1; k < pts.size(); ++k) {
      double a = 0.0;
      for (std::size_t c = 0; c < pts[i].size(); ++c) a += (pts[i][c] - pts[k][c]) * (pts[i][c] - pts[k][c]);
      d = std::max(d, std::sqrt(a));
    }
  return d;
}

// -log sum_i w_i exp(-phi_i(u)) via log-sum-exp, with grad = sum_i r_i grad phi_i.
template <class Phi>
double neg_log_mix(std::span<const double> u, std::span<double> grad, const std::vector<double>& logw,
                   std::size_t count, Phi&& phi, std::vector<double>& scratch_val,
                   std::vector<double>& scratch_grad) {
  const std::size_t dim = u.size();
  double mx = -kInf;
  for (std::size_t i = 0; i < count; ++i) {
    scratch_val[i] = logw[i] - phi(i, u, grad.empty() ? nullptr : &scratch_grad[i * dim]);
    mx = std::max(mx, scratch_val[i]);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    scratch_val[i] = std::exp(scratch_val[i] - mx);
    s += scratch_val[i];
  }
  if (!grad.empty()) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      const double r = scratch_val[i] / s;
      for (std::size_t c = 0; c < dim; ++c) grad[c] += r * scratch_grad[i * dim + c];
    }
  }
  return -(mx + std::log(s));
}

PointPotential make_zero(std::size_t dim) {
  PointPotential G;
  G.name = "zero";
  G.dim = dim;
  G.M_G = 0.0;
  G.L_G = 0.0;
  G.is_zero = true;
  G.eval = [](std::span<const double>, std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return 0.0;
  };
  return G;
}

PointPotential make_quadratic(const nlohmann::json& p, std::size_t dim) {
  const double c = p.value("curvature", 1.0);
  PointPotential G;
  G.name = "quadratic";
  G.dim = dim;
  G.L_G = std::abs(c);
  G.M_G = c == 0.0 ? 0.0 : kInf;
  G.eval = [c](std::span<const double> u, std::span<double> grad) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = c * u[i];
    return 0.5 * c * norm2(u);
  };
  return G;
}

PointPotential make_quadratic_cosine(const nlohmann::json& p, std::size_t dim) {
  const double c = p.value("curvature", 1.0);
  const double amp = p.value("amplitude", 1.0);
  const double freq = p.value("frequency", 1.0);
  PointPotential G;
  G.name = "quadratic_cosine";
  G.dim = dim;
  G.L_G = std::abs(c) + std::abs(amp) * freq * freq;
  G.M_G = c == 0.0 ? std::abs(amp) * freq * std::sqrt(static_cast<double>(dim)) : kInf;
  G.eval = [c, amp, freq](std::span<const double> u, std::span<double> grad) {
    double v = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      v += 0.5 * c * u[i] * u[i] + amp * (1.0 - std::cos(freq * u[i]));
      if (!grad.empty()) grad[i] = c * u[i] + amp * freq * std::sin(freq * u[i]);
    }
    return v;
  };
  return G;
}

PointPotential make_normal_mixture(const nlohmann::json& p, std::size_t dim) {
  auto means = mixture_means(p, dim);
  const auto w = mixture_weights(p, means.size());
  const double sigma = p.value("sigma", 1.0);
  if (!(sigma > 0.0)) throw ConfigError("potential.params.sigma", "must be positive");
  const double inv_s2 = 1.0 / (sigma * sigma);
  std::vector<double> logw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) logw[i] = std::log(w[i]);
  std::vector<double> flat;
  for (const auto& m : means) flat.insert(flat.end(), m.begin(), m.end());
  const double diam = diameter(means);

  PointPotential G;
  G.name = "normal_mixture";
  G.dim = dim;
  G.L_G = std::max(inv_s2, diam * diam * inv_s2 * inv_s2 / 4.0);
  G.M_G = kInf;
  G.params["means"] = means;
  G.params["weights"] = w;
  G.params["sigma"] = sigma;
  const std::size_t count = means.size();
  G.eval = [flat, logw, inv_s2, count, dim](std::span<const double> u, std::span<double> grad) {
    thread_local std::vector<double> sv, sg;
    sv.resize(count);
    sg.resize(count * dim);
    auto phi = [&](std::size_t i, std::span<const double> x, double* g) {
      double a = 0.0;
      const double* mu = &flat[i * dim];
      for (std::size_t c = 0; c < dim; ++c) {
        const double dlt = x[c] - mu[c];
        a += dlt * dlt;
        if (g) g[c] = dlt * inv_s2;
      }
      return 0.5 * a * inv_s2;
    };
    return neg_log_mix(u, grad, logw, count, phi, sv, sg);
  };
  return G;
}

PointPotential make_laplace_mixture(const nlohmann::json& p, std::size_t dim) {
  auto means = mixture_means(p, dim);
  const auto w = mixture_weights(p, means.size());
  const double scale = p.value("scale", 1.0);
  const double delta = p.value("delta", 1e-2);
  if (!(scale > 0.0) || !(delta > 0.0))
    throw ConfigError("potential.params", "scale and delta must be positive");
  std::vector<double> logw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) logw[i] = std::log(w[i]);
  std::vector<double> flat;
  for (const auto& m : means) flat.insert(flat.end(), m.begin(), m.end());

  PointPotential G;
  G.name = "laplace_mixture";
  G.dim = dim;
  G.M_G = 1.0 / scale;
  G.L_G = 1.0 / (scale * delta) + 1.0 / (scale * scale);
  G.params["means"] = means;
  G.params["weights"] = w;
  G.params["scale"] = scale;
  G.params["delta"] = delta;
  const std::size_t count = means.size();
  const double d2 = delta * delta;
  G.eval = [flat, logw, scale, d2, count, dim](std::span<const double> u, std::span<double> grad) {
    thread_local std::vector<double> sv, sg;
    sv.resize(count);
    sg.resize(count * dim);
    auto phi = [&](std::size_t i, std::span<const double> x, double* g) {
      double a = 0.0;
      const double* mu = &flat[i * dim];
      for (std::size_t c = 0; c < dim; ++c) a += (x[c] - mu[c]) * (x[c] - mu[c]);
      const double r = std::sqrt(a + d2);
      if (g)
        for (std::size_t c = 0; c < dim; ++c) g[c] = (x[c] - mu[c]) / (scale * r);
      return r / scale;
    };
    return neg_log_mix(u, grad, logw, count, phi, sv, sg);
  };
  return G;
}

PointPotential make_banana(const nlohmann::json& p, std::size_t dim) {
  if (dim != 2) throw ConfigError("model.d", "banana potential requires d = 2");
  const double sb = p.value("sigma_b", 1.0);
  const double kb = p.value("curvature", 1.0);
  const double off = p.value("offset", 0.0);
  if (!(sb > 0.0)) throw ConfigError("potential.params.sigma_b", "must be positive");
  PointPotential G;
  G.name = "banana";
  G.dim = 2;
  G.params = {{"sigma_b", sb}, {"curvature", kb}, {"offset", off}};
  const double is2 = 1.0 / (sb * sb);
  G.eval = [is2, kb, off](std::span<const double> u, std::span<double> grad) {
    const double a = u[0] - 1.0;
    const double r = u[1] - kb * u[0] * u[0] - off;
    if (!grad.empty()) {
      grad[0] = a * is2 - 2.0 * kb * u[0] * r;
      grad[1] = r;
    }
    return 0.5 * a * a * is2 + 0.5 * r * r;
  };
  return G;
}

PointPotential make_three_well(std::size_t dim) {
  if (dim != 2) throw ConfigError("model.d", "three_well potential requires d = 2");
  PointPotential G;
  G.name = "three_well";
  G.dim = 2;
  G.eval = [](std::span<const double> u, std::span<double> grad) {
    const double x = u[0], y = u[1];
    const double y1 = y - 1.0 / 3.0, y2 = y - 5.0 / 3.0;
    const double e1 = 3.0 * std::exp(-x * x - y1 * y1);
    const double e2 = -3.0 * std::exp(-x * x - y2 * y2);
    const double e3 = -5.0 * std::exp(-(x - 1.0) * (x - 1.0) - y * y);
    const double e4 = -5.0 * std::exp(-(x + 1.0) * (x + 1.0) - y * y);
    if (!grad.empty()) {
      grad[0] = -2.0 * x * (e1 + e2) - 2.0 * (x - 1.0) * e3 - 2.0 * (x + 1.0) * e4 + 0.8 * x * x * x;
      grad[1] = -2.0 * y1 * e1 - 2.0 * y2 * e2 - 2.0 * y * (e3 + e4) + 0.8 * y1 * y1 * y1;
    }
    return e1 + e2 + e3 + e4 + 0.2 * x * x * x * x + 0.2 * y1 * y1 * y1 * y1;
  };
  return G;
}

PointPotential with_quadratic_shift(PointPotential G, double c) {
  if (c == 0.0) return G;
  auto inner = G.eval;
  G.eval = [inner, c](std::span<const double> u, std::span<double> grad) {
    const double v = inner(u, grad);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= c * u[i];
    return v - 0.5 * c * norm2(u);
  };
  G.is_zero = false;
  G.params["quadratic_shift"] = c;
  if (G.name == "normal_mixture") {
    const double inv_s2 = 1.0 / std::pow(G.params["sigma"].get<double>(), 2);
    const auto means = G.params["means"].get<std::vector<std::vector<double>>>();
    const double diam = diameter(means);
    const double base = inv_s2 - c;
    G.L_G = std::max(std::abs(base), std::abs(base - diam * diam * inv_s2 * inv_s2 / 4.0));
    double max_mean = 0.0;
    for (const auto& m : means) max_mean = std::max(max_mean, std::sqrt(norm2(m)));
    G.M_G = base == 0.0 ? max_mean * inv_s2 : kInf;
  } else if (G.name == "quadratic") {
    const double cur = G.params.value("curvature", 1.0);
    G.L_G = std::abs(cur - c);
    G.M_G = cur == c ? 0.0 : kInf;
  } else {
    G.L_G = G.L_G + std::abs(c);
    G.M_G = kInf;
  }
  return G;
}

}  // namespace

std::vector<double> PointPotential::gradient(std::span<const double> u) const {
  std::vector<double> g(u.size());
  eval(u, g);
  return g;
}

PointPotential potential_library(const std::string& name, const nlohmann::json& params,
                                 std::size_t dim) {
  if (dim == 0) throw ConfigError("model.d", "must be positive");
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  PointPotential G;
  if (name == "zero") {
    G = make_zero(dim);
  } else if (name == "quadratic") {
    G = make_quadratic(p, dim);
    G.params["curvature"] = p.value("curvature", 1.0);
  } else if (name == "quadratic_cosine") {
    G = make_quadratic_cosine(p, dim);
  } else if (name == "normal_mixture") {
    G = make_normal_mixture(p, dim);
  } else if (name == "laplace_mixture") {
    G = make_laplace_mixture(p, dim);
  } else if (name == "banana") {
    G = make_banana(p, dim);
  } else if (name == "three_well") {
    G = make_three_well(dim);
  } else {
    throw ConfigError("potential.name", "unknown potential '" + name + "'");
  }
  for (auto it = p.begin(); it != p.end(); ++it)
    if (!G.params.contains(it.key())) G.params[it.key()] = it.value();
  return with_quadratic_shift(std::move(G), p.value("quadratic_shift", 0.0));
}

PointPotential girsanov_potential(std::size_t dim,
                                  std::function<void(std::span<const double>, std::span<double>)> grad_psi,
                                  std::function<double(std::span<const double>)> laplacian_psi,
                                  double M_G, double L_G,
                                  std::function<void(std::span<const double>, std::span<double>)> grad_G) {
  PointPotential G;
  G.name = "girsanov";
  G.dim = dim;
  G.M_G = M_G;
  G.L_G = L_G;
  auto value = [grad_psi, laplacian_psi, dim](std::span<const double> u) {
    std::vector<double> g(dim);
    grad_psi(u, g);
    return 0.5 * norm2(g) - 0.5 * laplacian_psi(u);
  };
  G.eval = [value, grad_G, dim](std::span<const double> u, std::span<double> grad) {
    if (!grad.empty()) {
      if (grad_G) {
        grad_G(u, grad);
      } else {
        std::vector<double> x(u.begin(), u.end());
        for (std::size_t i = 0; i < dim; ++i) {
          const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
          const double xi = x[i];
          x[i] = xi + h;
          const double fp = value(x);
          x[i] = xi - h;
          const double fm = value(x);
          x[i] = xi;
          grad[i] = (fp - fm) / (2.0 * h);
        }
      }
    }
    return value(u);
  };
  return G;
}

PotentialReport validate_point_potential(const PointPotential& G, RngStream& rng,
                                         std::size_t samples, double radius) {
  PotentialReport r;
  r.samples = samples;
  const std::size_t d = G.dim;
  std::vector<double> u(d, 0.0), g(d), u2(d), g2(d), x(d);
  G.eval(u, g);
  r.grad_at_zero = std::sqrt(norm2(g));
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& c : u) c = radius * (2.0 * rng.uniform() - 1.0);
    G.eval(u, g);
    r.max_grad = std::max(r.max_grad, std::sqrt(norm2(g)));

    double err = 0.0;
    x = u;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(u[i]));
      x[i] = u[i] + h;
      const double fp = G.value(x);
      x[i] = u[i] - h;
      const double fm = G.value(x);
      x[i] = u[i];
      const double fd = (fp - fm) / (2.0 * h);
      err = std::max(err, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
    }
    r.max_fd_rel_error = std::max(r.max_fd_rel_error, err);

    const double step = 0.1 * radius * rng.uniform() + 1e-3;
    double dn = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double dir = rng.normal();
      u2[i] = u[i] + step * dir;
      dn += step * dir * step * dir;
    }
    G.eval(u2, g2);
    double dg = 0.0;
    for (std::size_t i = 0; i < d; ++i) dg += (g[i] - g2[i]) * (g[i] - g2[i]);
    if (dn > 0.0) r.lipschitz_estimate = std::max(r.lipschitz_estimate, std::sqrt(dg / dn));
  }
  r.grad_zero_ok = r.grad_at_zero <= 1e-10;
  r.bound_ok = r.max_grad <= G.M_G * (1.0 + 1e-9) + 1e-12;
  r.fd_ok = r.max_fd_rel_error <= 1e-6;
  r.lipschitz_ok = r.lipschitz_estimate <= G.L_G * (1.0 + 1e-9) + 1e-12;
  return r;
}

nlohmann::json to_json(const PotentialReport& r) {
  return {{"grad_at_zero", r.grad_at_zero},       {"max_grad", r.max_grad},
          {"max_fd_rel_error", r.max_fd_rel_error}, {"lipschitz_estimate", r.lipschitz_estimate},
          {"grad_zero_ok", r.grad_zero_ok},       {"bound_ok", r.bound_ok},
          {"fd_ok", r.fd_ok},                     {"lipschitz_ok", r.lipschitz_ok},
          {"samples", r.samples},                 {"ok", r.ok()}};
}

}  // namespace phmc
