#include "phmc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phmc/error.hpp"
#include "phmc/parallel.hpp"

namespace phmc {

GammaSpec GammaSpec::parse(const std::string& s) {
  if (s == "zero" || s == "0") return {GammaRule::zero};
  if (s == "one-over-T" || s == "1/T") return {GammaRule::one_over_T};
  if (s == "cot-T" || s == "cotT") return {GammaRule::cot_T};
  if (s == "theorem") return {GammaRule::theorem};
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() && *end == '\0' && v >= 0.0) return {GammaRule::fixed, v};
  throw ConfigError("kernel.gamma", "unknown gamma rule '" + s + "'");
}

std::string GammaSpec::name() const {
  switch (rule) {
    case GammaRule::zero: return "zero";
    case GammaRule::one_over_T: return "one-over-T";
    case GammaRule::cot_T: return "cot-T";
    case GammaRule::theorem: return "theorem";
    case GammaRule::fixed: return "fixed:" + std::to_string(value);
  }
  return "unknown";
}

double resolve_gamma(const GammaSpec& g, double T) {
  if (!(T > 0.0)) throw ConfigError("T", "must be positive");
  switch (g.rule) {
    case GammaRule::zero: return 0.0;
    case GammaRule::one_over_T: return 1.0 / T;
    case GammaRule::cot_T: return std::max(0.0, std::cos(T) / std::sin(T));
    case GammaRule::theorem:
      if (!(g.R > 0.0)) throw ConfigError("kernel.gamma.R", "theorem rule needs R > 0");
      return std::min(1.0 / T, 1.0 / (4.0 * g.R));
    case GammaRule::fixed:
      if (!(g.value >= 0.0) || !std::isfinite(g.value))
        throw ConfigError("kernel.gamma", "fixed gamma must be finite and non-negative");
      return g.value;
  }
  return 0.0;
}

void CouplingKernel::validate() const {
  base.validate();
  if (split.n > base.model->dimension()) throw ConfigError("kernel.n", "exceeds the dimension");
  if (!(meet_threshold >= 0.0)) throw ConfigError("kernel.meet_threshold", "must be non-negative");
  if (!(alpha > 0.0)) throw ConfigError("kernel.alpha", "must be positive");
  resolve_gamma(gamma, base.T);
}

AlphaNorm CouplingKernel::distance_norm() const {
  return AlphaNorm{alpha, split, base.model->covariance(), base.Ctilde(), s};
}

SpectralVector reflection_apply(const SpectralVector& xi, const SpectralVector& z,
                                const SpectralOperator& Ctilde) {
  if (xi.size() != z.size()) throw DimensionError("reflection_apply", xi.size(), z.size());
  if (xi.size() > Ctilde.dimension())
    throw DimensionError("reflection_apply", Ctilde.dimension(), xi.size());
  double zn2 = 0.0, dot = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    zn2 += z[j] * z[j] / Ctilde[j];
    dot += z[j] * xi[j] / Ctilde[j];
  }
  if (!(zn2 > 0.0)) throw ConfigError("reflection_apply", "reflection undefined for z = 0");
  SpectralVector out = xi;
  const double f = 2.0 * dot / zn2;
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = xi[j] - f * z[j];
  return out;
}

double max_coupling_density(const SpectralVector& h, const SpectralVector& x,
                            const SpectralOperator& Ctilde) {
  if (h.size() != x.size()) throw DimensionError("max_coupling_density", h.size(), x.size());
  double hx = 0.0, hh = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    hx += h[j] * x[j] / Ctilde[j];
    hh += h[j] * h[j] / Ctilde[j];
  }
  return std::exp(hx - 0.5 * hh);
}

CoupledEngine::CoupledEngine(const CouplingKernel& kernel)
    : kernel_((kernel.validate(), kernel)),
      gamma_(resolve_gamma(kernel.gamma, kernel.base.T)),
      norm_(kernel.distance_norm()),
      engine_(kernel.base) {
  const std::size_t n = kernel.base.model->dimension();
  xi_.resize(n);
  eta_.resize(n);
  z_.resize(n);
  diff_.resize(n);
}

double CoupledEngine::distance(const ChainState& x, const ChainState& y) {
  for (std::size_t i = 0; i < diff_.size(); ++i) diff_[i] = x.q[i] - y.q[i];
  engine_.model().basis().to_eigen(diff_, z_);
  return alpha_norm(z_, norm_);
}

CoupledInfo CoupledEngine::step(ChainState& x, ChainState& y, bool& coalesced, RngStream& rng) {
  CoupledInfo info;
  engine_.sample_velocity(rng, xi_);
  const double uc = rng.uniform();
  const std::uint64_t k = engine_.sample_steps(rng);
  const double ua = engine_.sample_accept(rng);
  const double ub = kernel_.shared_uniform ? ua : engine_.sample_accept(rng);
  info.steps = k;

  if (coalesced) {
    const TransitionInfo t = engine_.transition(x, xi_, k, ua);
    y = x;
    info.shift_event = true;
    info.accepted_x = info.accepted_y = t.accepted;
    return info;
  }

  for (std::size_t i = 0; i < diff_.size(); ++i) diff_[i] = x.q[i] - y.q[i];
  engine_.model().basis().to_eigen(diff_, z_);
  const auto& Ct = kernel_.base.Ctilde();
  const std::size_t n = kernel_.split.n;
  std::copy(xi_.begin(), xi_.end(), eta_.begin());
  double zn2 = 0.0, zx = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    zn2 += z_[j] * z_[j] / Ct[j];
    zx += z_[j] * xi_[j] / Ct[j];
  }
  if (zn2 > 0.0 && gamma_ > 0.0) {
    const double log_rho = -gamma_ * zx - 0.5 * gamma_ * gamma_ * zn2;
    if (std::log(uc) <= log_rho) {
      info.shift_event = true;
      for (std::size_t j = 0; j < n; ++j) eta_[j] = xi_[j] + gamma_ * z_[j];
    } else {
      const double f = 2.0 * zx / zn2;
      for (std::size_t j = 0; j < n; ++j) eta_[j] = xi_[j] - f * z_[j];
    }
  } else {
    info.shift_event = true;
  }

  const TransitionInfo tx = engine_.transition(x, xi_, k, ua);
  const TransitionInfo ty = engine_.transition(y, eta_, k, ub);
  info.accepted_x = tx.accepted;
  info.accepted_y = ty.accepted;
  info.distance = distance(x, y);
  if (info.distance <= kernel_.meet_threshold) {
    y = x;
    coalesced = true;
  }
  return info;
}

CoupledPair coupled_step(const CoupledPair& pair, const CouplingKernel& kernel, RngStream& rng,
                         CoupledInfo* info) {
  CoupledEngine eng(kernel);
  const Model& m = *kernel.base.model;
  const SpectralVector xg = m.to_grid(pair.X), yg = m.to_grid(pair.Y);
  ChainState x = eng.chain().make_state(xg.coefficients());
  ChainState y = eng.chain().make_state(yg.coefficients());
  bool coalesced = pair.coalesced;
  const CoupledInfo ci = eng.step(x, y, coalesced, rng);
  if (info) *info = ci;
  CoupledPair out;
  out.X = SpectralVector::grid(std::move(x.q), m.weight());
  out.Y = SpectralVector::grid(std::move(y.q), m.weight());
  if (pair.X.representation() == Representation::eigen) {
    out.X = m.to_eigen(out.X);
    out.Y = m.to_eigen(out.Y);
  }
  out.coalesced = coalesced;
  return out;
}

FailureProbability coupling_failure_probability(const SpectralVector& z, double gamma,
                                                const SpectralOperator& Ctilde,
                                                std::size_t n_samples, RngStream& rng) {
  if (n_samples < 1000) throw ConfigError("n_samples", "must be at least 1000");
  const std::size_t n = z.size();
  if (n > Ctilde.dimension()) throw DimensionError("coupling_failure_probability", Ctilde.dimension(), n);
  FailureProbability r;
  double zn2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) zn2 += z[j] * z[j] / Ctilde[j];
  r.h = std::abs(gamma) * std::sqrt(zn2);
  r.tv_exact = 2.0 * (normal_cdf(r.h / 2.0) - 0.5);
  r.bound = r.h / std::sqrt(2.0 * std::numbers::pi);
  std::vector<double> xi(n);
  std::size_t reflected = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    double zx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      xi[j] = std::sqrt(Ctilde[j]) * rng.normal();
      zx += z[j] * xi[j] / Ctilde[j];
    }
    const double u = rng.uniform();
    const double log_rho = -gamma * zx - 0.5 * gamma * gamma * zn2;
    if (std::log(u) > log_rho) ++reflected;
  }
  const double p = static_cast<double>(reflected) / static_cast<double>(n_samples);
  r.empirical = p;
  r.se = std::sqrt(std::max(p * (1.0 - p), 1e-300) / static_cast<double>(n_samples));
  return r;
}

namespace {

CouplingKernel kernel_at(const CouplingKernel& templ, double T, const GammaSpec& g) {
  CouplingKernel k = templ;
  k.base.T = T;
  if (k.base.duration.kind == DurationRule::Kind::geometric_steps)
    k.base.duration.mean_steps = std::max(1.0, T / k.base.integrator.dt);
  k.gamma = g;
  return k;
}

}  // namespace

CouplingTimeResult coupling_time_experiment(const SpectralVector& x0, const SpectralVector& y0,
                                            const CouplingKernel& templ,
                                            const CouplingTimeConfig& cfg) {
  if (cfg.replicas < 1) throw ConfigError("replicas", "must be at least 1");
  if (cfg.T_grid.empty()) throw ConfigError("T_grid", "must be non-empty");
  if (cfg.rules.empty()) throw ConfigError("gamma_rules", "must be non-empty");
  for (double T : cfg.T_grid)
    for (const auto& g : cfg.rules) kernel_at(templ, T, g).validate();

  const Model& m = *templ.base.model;
  const SpectralVector xg = m.to_grid(x0), yg = m.to_grid(y0);
  const std::size_t nT = cfg.T_grid.size(), nR = cfg.rules.size(), reps = cfg.replicas;
  CouplingTimeResult res;
  res.rows.resize(nT * nR * reps);

  parallel_for(res.rows.size(), cfg.threads, [&](std::size_t idx) {
    const std::size_t r = idx % reps;
    const std::size_t g = (idx / reps) % nR;
    const std::size_t t = idx / (reps * nR);
    CoupledEngine eng(kernel_at(templ, cfg.T_grid[t], cfg.rules[g]));
    ChainState x = eng.chain().make_state(xg.coefficients());
    ChainState y = eng.chain().make_state(yg.coefficients());
    RngStream rng = RngStream::derive(cfg.seed, {t, r});
    bool met = eng.distance(x, y) <= templ.meet_threshold;
    std::size_t steps = 0;
    while (!met && steps < cfg.max_steps) {
      eng.step(x, y, met, rng);
      ++steps;
    }
    res.rows[idx] = {cfg.rules[g].name(), cfg.T_grid[t], r, steps, !met};
  });

  for (std::size_t t = 0; t < nT; ++t)
    for (std::size_t g = 0; g < nR; ++g) {
      std::vector<double> v;
      CouplingTimeSummary s;
      s.gamma_rule = cfg.rules[g].name();
      s.T = cfg.T_grid[t];
      s.replicas = reps;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& row = res.rows[(t * nR + g) * reps + r];
        v.push_back(static_cast<double>(row.meet_steps));
        if (row.censored) ++s.censored;
      }
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(reps);
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.se = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;
      std::sort(v.begin(), v.end());
      s.median = reps % 2 == 1 ? v[reps / 2] : 0.5 * (v[reps / 2 - 1] + v[reps / 2]);
      res.summary.push_back(s);
    }
  return res;
}

std::vector<DecayPoint> empirical_wasserstein_decay(const CouplingKernel& kernel,
                                                    const InitialSampler& x0,
                                                    const InitialSampler& y0, std::size_t k_steps,
                                                    std::size_t replicas, std::uint64_t seed,
                                                    std::size_t threads) {
  if (replicas < 1) throw ConfigError("replicas", "must be at least 1");
  kernel.validate();
  const Model& m = *kernel.base.model;
  const std::size_t n = m.dimension();
  const double s = kernel.s.value();
  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) weights[j] = s == 0.0 ? 1.0 : std::pow(m.covariance()[j], -s);
  std::vector<std::vector<double>> dist(replicas, std::vector<double>(k_steps + 1, 0.0));

  parallel_for(replicas, threads, [&](std::size_t r) {
    RngStream rng = RngStream::derive(seed, {r});
    CoupledEngine eng(kernel);
    const SpectralVector xs = m.to_grid(x0(rng)), ys = m.to_grid(y0(rng));
    ChainState x = eng.chain().make_state(xs.coefficients());
    ChainState y = eng.chain().make_state(ys.coefficients());
    std::vector<double> diff(n), z(n);
    auto snorm = [&] {
      for (std::size_t i = 0; i < n; ++i) diff[i] = x.q[i] - y.q[i];
      m.basis().to_eigen(diff, z);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += weights[j] * z[j] * z[j];
      return std::sqrt(acc);
    };
    bool met = eng.distance(x, y) <= kernel.meet_threshold;
    if (met) y = x;
    dist[r][0] = snorm();
    for (std::size_t k = 1; k <= k_steps; ++k) {
      eng.step(x, y, met, rng);
      dist[r][k] = snorm();
    }
  });

  std::vector<DecayPoint> out(k_steps + 1);
  for (std::size_t k = 0; k <= k_steps; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) sum += dist[r][k];
    const double mean = sum / static_cast<double>(replicas);
    double ss = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) ss += (dist[r][k] - mean) * (dist[r][k] - mean);
    const double se = replicas > 1
                          ? std::sqrt(ss / static_cast<double>(replicas - 1) / static_cast<double>(replicas))
                          : 0.0;
    out[k] = {k, mean, se, mean > 0.0 ? std::log(mean) : -std::numeric_limits<double>::infinity()};
  }
  return out;
}

}  // namespace phmc
