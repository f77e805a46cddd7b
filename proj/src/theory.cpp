#include "phmc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "phmc/error.hpp"
#include "phmc/models.hpp"
#include "phmc/parallel.hpp"

namespace phmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool within(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12); }

double safe_exp(double x) { return x > 709.0 ? kInf : std::exp(x); }

// log of min(T^2 q, (1/128) T^p max(R,T) exp(-max(R,T)/T)).
double log_rate(double first, double T, double Tpow, double R) {
  const double M = std::max(R, T);
  const double second = std::log(std::pow(T, Tpow) * M / 128.0) - M / T;
  return std::min(std::log(first), second);
}

}  // namespace

nlohmann::json to_json(const ConditionReport& r) {
  return {{"name", r.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ok", r.ok}, {"ratio", r.ratio()}};
}

ConditionReport lyapunov_condition(const DriftConstants& c, double T) {
  ConditionReport r;
  r.name = "L T^2 <= K/(48 L)";
  r.lhs = c.L() * T * T;
  r.rhs = c.K() / (48.0 * c.L());
  r.ok = within(r.lhs, r.rhs);
  return r;
}

double lyapunov_bound(double x_norm2, const DriftConstants& c, double trace_term, double T) {
  const auto cond = lyapunov_condition(c, T);
  if (!cond.ok) throw ConditionError(cond.name, cond.lhs, cond.rhs);
  return (1.0 - 0.5 * c.K() * T * T) * x_norm2 + 5.0 * (c.A() + trace_term) * T * T;
}

double minimal_R(const DriftConstants& c, double sigma_max, double trace_term) {
  return 8.0 * std::sqrt(40.0) * std::sqrt(c.A() + trace_term) * sigma_max * c.L() /
         std::sqrt(c.K());
}

ConditionReport contraction_condition(const DriftConstants& c, double sigma_min, double sigma_max,
                                      double R, double T) {
  ConditionReport r;
  r.name = "contraction";
  r.lhs = sigma_max / sigma_min * c.L() * T * T;
  r.rhs = std::min(c.K() / (48.0 * c.L()), sigma_min / (256.0 * c.L() * R * R * sigma_max));
  r.ok = within(r.lhs, r.rhs);
  return r;
}

nlohmann::json to_json(const TheoremConstants& t) {
  return {{"L", t.L},
          {"K", t.K},
          {"A", t.A},
          {"n", t.n},
          {"sigma_min", t.sigma_min},
          {"sigma_max", t.sigma_max},
          {"trace", t.trace_term},
          {"T", t.T},
          {"alpha", t.alpha},
          {"gamma", t.gamma},
          {"a", t.a},
          {"eps", t.eps},
          {"log_eps", t.log_eps},
          {"R", t.R},
          {"R_min", t.R_min},
          {"c", t.c},
          {"log_c", t.log_c},
          {"C", t.C_cor},
          {"log_C", t.log_C},
          {"condition", to_json(t.condition)}};
}

TheoremConstants contraction_constants(const DriftConstants& drift, double sigma_min,
                                       double sigma_max, double trace_term, double T,
                                       std::optional<double> R) {
  if (!(T > 0.0)) throw ConfigError("T", "must be positive");
  if (!(sigma_min > 0.0) || sigma_max < sigma_min)
    throw ConfigError("sigma", "need 0 < sigma_min <= sigma_max");
  if (!(trace_term > 0.0)) throw ConfigError("trace", "must be positive");
  TheoremConstants t;
  t.L = drift.L();
  t.K = drift.K();
  t.A = drift.A();
  t.n = drift.n();
  t.sigma_min = sigma_min;
  t.sigma_max = sigma_max;
  t.trace_term = trace_term;
  t.T = T;
  t.R_min = minimal_R(drift, sigma_max, trace_term);
  t.R = R.value_or(t.R_min);
  if (!within(t.R_min, t.R)) throw ConditionError("R_min <= R", t.R_min, t.R);
  t.condition = contraction_condition(drift, sigma_min, sigma_max, t.R, T);
  if (!t.condition.ok) throw ConditionError(t.condition.name, t.condition.lhs, t.condition.rhs);
  t.alpha = 4.0 * sigma_max * t.L;
  t.gamma = std::min(1.0 / T, 1.0 / (4.0 * t.R));
  t.a = 1.0 / T;
  const double AT = t.A + trace_term;
  t.log_eps = -std::log(160.0) - std::log(AT) - t.R / T;
  t.eps = safe_exp(t.log_eps);
  t.log_c = log_rate(t.K * T * T / 16.0, T, 1.0, t.R);
  t.c = safe_exp(t.log_c);
  t.log_C = std::max(std::log(2.0 * T / sigma_min),
                     std::log(23.0) + 0.5 * std::log(AT) + t.R / (2.0 * T));
  t.C_cor = safe_exp(t.log_C);
  return t;
}

double mixing_log_numerator(const TheoremConstants& k, double M1) {
  const double extra = std::exp(0.5 * k.log_eps) * M1 +
                       0.25 / std::sqrt(k.K) * std::exp(-k.R / (2.0 * k.T));
  return k.log_C + std::log1p(extra);
}

MixingTime mixing_time_log(const TheoremConstants& k, double log_delta, double M1) {
  if (!(k.T > 0.0 && k.T < k.R)) throw ConditionError("0 < T < R", k.T, k.R);
  if (!(M1 >= 0.0)) throw ConfigError("M1", "must be non-negative");
  MixingTime mt;
  mt.log_numerator = mixing_log_numerator(k, M1);
  double num = mt.log_numerator - log_delta;
  if (num <= 1e-14 * std::max(1.0, std::abs(mt.log_numerator))) num = 0.0;
  if (num == 0.0) {
    mt.bound = 0.0;
    mt.steps = 0;
    mt.log10_bound = -kInf;
    return mt;
  }
  mt.log10_bound = std::log10(num) - k.log_c / std::log(10.0);
  mt.bound = k.c > 0.0 ? num / k.c : kInf;
  if (std::isfinite(mt.bound) && mt.bound < 1.8e19)
    mt.steps = static_cast<std::uint64_t>(std::ceil(mt.bound));
  return mt;
}

MixingTime mixing_time(const TheoremConstants& k, double delta, double M1) {
  if (!(delta > 0.0)) throw ConfigError("delta", "must be positive");
  return mixing_time_log(k, std::log(delta), M1);
}

nlohmann::json to_json(const ModelConstants& c) {
  return {{"model", c.model},
          {"T", c.T},
          {"kappa", c.kappa},
          {"m_l", c.m_l},
          {"n", c.n},
          {"m_star", c.m_star},
          {"L", c.L},
          {"K", c.K},
          {"A", c.A},
          {"trace_bound", c.trace_bound},
          {"sigma_max_bound", c.sigma_max_bound},
          {"alpha", c.alpha},
          {"gamma", c.gamma},
          {"a", c.a},
          {"R", c.R},
          {"c", c.c},
          {"log_c", c.log_c},
          {"C", c.C},
          {"log_C", c.log_C},
          {"eps", c.eps},
          {"log_eps", c.log_eps},
          {"model_condition", to_json(c.condition)},
          {"condition_ok", c.condition_ok}};
}

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be positive and finite");
}

void finish(ModelConstants& mc, double T) {
  mc.T = T;
  mc.gamma = std::min(1.0 / T, mc.R > 0.0 ? 1.0 / (4.0 * mc.R) : kInf);
  mc.a = 1.0 / T;
  mc.alpha = 4.0 * mc.sigma_max_bound * mc.L;
  mc.log_c = log_rate(T * T / 32.0, T, 2.0, mc.R);
  mc.c = safe_exp(mc.log_c);
  mc.C = safe_exp(mc.log_C);
  mc.eps = safe_exp(mc.log_eps);
  mc.condition_ok = mc.condition.ok;
}

}  // namespace

ModelConstants tps_constants(double tau, std::size_t d, double M_G, double L_G, double T) {
  check_positive(tau, "tau");
  check_positive(T, "T");
  if (d < 1) throw ConfigError("d", "must be at least 1");
  if (!(M_G >= 0.0) || !(L_G >= 0.0) || !std::isfinite(M_G) || !std::isfinite(L_G))
    throw ConfigError("M_G/L_G", "must be finite and non-negative");
  ModelConstants mc;
  mc.model = "tps";
  const double dd = static_cast<double>(d);
  mc.kappa = 2.0 * tau * tau * L_G / (kPi * kPi);
  mc.m_l = static_cast<std::size_t>(std::floor(std::sqrt(3.0 * mc.kappa)));
  mc.n = mc.m_l * d;
  mc.m_star = static_cast<std::size_t>(std::ceil((static_cast<double>(mc.m_l) + 1.0) * kPi / 2.0));
  mc.L = 1.0 + mc.kappa;
  mc.K = 0.5;
  mc.A = std::pow(tau, 5) / std::pow(kPi, 4) * M_G * M_G;
  mc.trace_bound = dd * tau * tau / 6.0;
  mc.sigma_max_bound = std::sqrt(6.0 * L_G);
  mc.R = 16.0 * std::sqrt(20.0) * kPi * std::sqrt(mc.kappa) * (1.0 + mc.kappa) *
         std::sqrt(std::pow(tau / kPi, 3) * M_G * M_G + dd);
  mc.log_C = std::max(std::log(T * tau),
                      std::log(23.0) + 0.5 * std::log(mc.A + dd * tau * tau / 3.0) + mc.R / (2.0 * T));
  mc.log_eps = -std::log(std::pow(tau, 5) * M_G * M_G) - mc.R / T;
  const double s3k = std::sqrt(3.0 * mc.kappa);
  mc.condition.name = "tps";
  mc.condition.lhs = 2.0 * s3k * (1.0 + mc.kappa) * T * T;
  const double second = s3k > 0.0 ? 1.0 / (512.0 * s3k * (1.0 + mc.kappa) * mc.R * mc.R) : kInf;
  mc.condition.rhs = std::min(1.0 / (96.0 * (1.0 + mc.kappa)), second);
  mc.condition.ok = within(mc.condition.lhs, mc.condition.rhs);
  finish(mc, T);
  return mc;
}

ModelConstants pimd_constants(double beta, double a, std::size_t d, double M_G, double L_G, double T) {
  check_positive(beta, "beta");
  check_positive(a, "a");
  check_positive(T, "T");
  if (d < 1) throw ConfigError("d", "must be at least 1");
  if (!(M_G >= 0.0) || !(L_G >= 0.0) || !std::isfinite(M_G) || !std::isfinite(L_G))
    throw ConfigError("M_G/L_G", "must be finite and non-negative");
  ModelConstants mc;
  mc.model = "pimd";
  const double dd = static_cast<double>(d);
  mc.kappa = 6.0 * L_G / a;
  mc.m_l = static_cast<std::size_t>(std::ceil(std::sqrt(1.5 * L_G) * beta / kPi));
  mc.n = mc.m_l == 0 ? 0 : 2 * mc.m_l * d - d;
  mc.m_star = static_cast<std::size_t>(std::ceil(2.0 * kPi * static_cast<double>(mc.m_l)));
  mc.L = 1.0 + mc.kappa;
  mc.K = 0.5;
  mc.A = 0.5 * beta / (a * a) * M_G * M_G;
  mc.trace_bound = 2.0 * dd * (1.0 / a + beta * beta);
  mc.sigma_max_bound = std::sqrt(a + 6.0 * L_G);
  const double k32 = std::pow(1.0 + mc.kappa, 1.5);
  mc.R = 16.0 * std::sqrt(20.0) * k32 *
         std::sqrt(0.5 * beta / a * M_G * M_G + 2.0 * dd * (beta * beta * a + 1.0));
  mc.log_C = std::max(std::log(2.0 * T * std::sqrt(a)),
                      std::log(23.0) + 0.5 * std::log(mc.A + mc.trace_bound) + mc.R / (2.0 * T));
  mc.log_eps = -std::log(80.0) + 2.0 * std::log(a) - std::log(beta * M_G * M_G) - mc.R / T;
  mc.condition.name = "pimd";
  mc.condition.lhs = k32 * T * T;
  mc.condition.rhs = std::min(1.0 / (96.0 * (1.0 + mc.kappa)), 1.0 / (256.0 * k32 * mc.R * mc.R));
  mc.condition.ok = within(mc.condition.lhs, mc.condition.rhs);
  finish(mc, T);
  return mc;
}

double tps_max_T(double tau, std::size_t d, double M_G, double L_G) {
  const auto mc = tps_constants(tau, d, M_G, L_G, 1.0);
  if (mc.condition.lhs == 0.0) return kInf;
  return std::sqrt(mc.condition.rhs / mc.condition.lhs);
}

double pimd_max_T(double beta, double a, std::size_t d, double M_G, double L_G) {
  const auto mc = pimd_constants(beta, a, d, M_G, L_G, 1.0);
  return std::sqrt(mc.condition.rhs / mc.condition.lhs);
}

EigenLemmaReport eigenvalue_lemma_check(const std::string& model, const nlohmann::json& params,
                                        std::size_t m) {
  if (m < 1) throw ConfigError("m", "must be at least 1");
  EigenLemmaReport r;
  r.model = model;
  r.m = m;
  const double mp1 = static_cast<double>(m + 1);
  if (model == "tps") {
    const double tau = params.value("tau", 1.0);
    const auto Lam = TpsModel::discrete_eigenvalues(tau, m);
    const double lam1 = TpsModel::continuum_eigenvalue(tau, 1);
    for (std::size_t k = 1; k <= m; ++k) {
      const double lam = TpsModel::continuum_eigenvalue(tau, k);
      const double L = Lam[k - 1];
      const double kk = static_cast<double>(k);
      const double rhs1 = lam * kk * kk * kPi * kPi / (6.0 * mp1 * mp1);
      r.max_violation_bracket =
          std::max({r.max_violation_bracket, (lam - L) / lam, (L - lam - rhs1) / lam});
      const double lhs2 = std::sqrt(Lam[0] / L);
      const double rhs2 = std::sqrt(lam1 / lam) * (1.0 + kPi * kPi / (16.0 * mp1 * mp1));
      r.max_violation_ratio = std::max(r.max_violation_ratio, (lhs2 - rhs2) / rhs2);
      ++r.checked;
    }
  } else if (model == "pimd") {
    const double beta = params.value("beta", 1.0);
    const double a = params.value("a", 1.0);
    const std::size_t kmax = (m + 2) / 2;
    const double Lam1 = PimdModel::discrete_eigenvalue(beta, a, m, 1);
    const double lam1 = PimdModel::continuum_eigenvalue(beta, a, 1);
    for (std::size_t k = 1; k <= kmax; ++k) {
      const double lam = PimdModel::continuum_eigenvalue(beta, a, k);
      const double L = PimdModel::discrete_eigenvalue(beta, a, m, k);
      const double th = static_cast<double>(k - 1) * kPi / static_cast<double>(m);
      r.max_violation_bracket =
          std::max({r.max_violation_bracket, (lam - L) / lam, (L - lam - 2.0 * th * th * lam) / lam});
      const double lhs2 = std::sqrt(Lam1 / L);
      const double rhs2 = std::sqrt(lam1 / lam);
      r.max_violation_ratio = std::max(r.max_violation_ratio, (lhs2 - rhs2) / rhs2);
      ++r.checked;
    }
  } else {
    throw ConfigError("model", "unknown model '" + model + "'");
  }
  return r;
}

namespace {

void record(ImplicationSweep& s, const ModelConstants& mc, const DriftConstants& dc,
            double sigma_min, double sigma_max, double trace, double T) {
  ++s.points;
  if (!mc.condition_ok) return;
  ++s.model_condition_held;
  if (minimal_R(dc, sigma_max, trace) > mc.R * (1.0 + 1e-12)) ++s.R_failures;
  const auto gen = contraction_condition(dc, sigma_min, sigma_max, mc.R, T);
  s.worst_ratio = std::max(s.worst_ratio, gen.ratio());
  if (!gen.ok) ++s.implication_failures;
}

}  // namespace

ImplicationSweep tps_implication_sweep(std::size_t points, std::uint64_t seed) {
  ImplicationSweep s;
  RngStream rng(derive_seed(seed, {0x747073ULL}));
  for (std::size_t i = 0; i < points; ++i) {
    const double tau = 0.5 + 3.5 * rng.uniform();
    const std::size_t d = 1 + static_cast<std::size_t>(3.0 * rng.uniform());
    const double M_G = 0.1 + 2.9 * rng.uniform();
    const double L_min = kPi * kPi / (6.0 * tau * tau);
    const double L_G = L_min * (1.0 + 1e-9 + 9.0 * rng.uniform());
    const double T = tps_max_T(tau, d, M_G, L_G) * (0.01 + 0.98 * rng.uniform());
    const auto mc = tps_constants(tau, d, M_G, L_G, T);
    const std::size_t m = mc.m_star + 1 + static_cast<std::size_t>(2.0 * mc.m_star * rng.uniform());
    const auto Lam = TpsModel::discrete_eigenvalues(tau, m);
    double trace = 0.0;
    for (double l : Lam) trace += static_cast<double>(d) * l;
    const double smin = 1.0 / std::sqrt(Lam[0]);
    const double smax = 1.0 / std::sqrt(Lam[mc.m_l - 1]);
    const DriftConstants dc(mc.L, mc.K, mc.A, mc.n);
    record(s, mc, dc, smin, smax, trace, T);
  }
  return s;
}

ImplicationSweep pimd_implication_sweep(std::size_t points, std::uint64_t seed) {
  ImplicationSweep s;
  RngStream rng(derive_seed(seed, {0x70696d64ULL}));
  for (std::size_t i = 0; i < points; ++i) {
    const double beta = 0.5 + 2.5 * rng.uniform();
    const double a = 0.1 + 1.9 * rng.uniform();
    const std::size_t d = 1 + static_cast<std::size_t>(3.0 * rng.uniform());
    const double M_G = 0.1 + 2.9 * rng.uniform();
    const double L_G = 0.05 + 4.95 * rng.uniform();
    const double T = pimd_max_T(beta, a, d, M_G, L_G) * (0.01 + 0.98 * rng.uniform());
    const auto mc = pimd_constants(beta, a, d, M_G, L_G, T);
    const std::size_t m = mc.m_star + 1 + static_cast<std::size_t>(2.0 * mc.m_star * rng.uniform());
    PimdParams p;
    p.beta = beta;
    p.a = a;
    p.d = d;
    p.m = m;
    p.G = potential_library("zero", {}, d);
    const PimdModel model(p);
    const auto& C = model.covariance();
    const double smin = 1.0 / std::sqrt(C[0]);
    const double smax = 1.0 / std::sqrt(C[mc.n - 1]);
    const DriftConstants dc(mc.L, mc.K, mc.A, mc.n);
    record(s, mc, dc, smin, smax, C.trace(), T);
  }
  return s;
}

ContractionReport empirical_contraction_check(
    const CouplingKernel& kernel, const TheoremConstants& constants,
    const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs, std::size_t replicas,
    std::uint64_t seed, std::size_t threads) {
  if (replicas < 2) throw ConfigError("replicas", "must be at least 2");
  CouplingKernel ck = kernel;
  ck.meet_threshold = 0.0;
  ck.validate();
  const Model& m = *ck.base.model;
  AlphaNorm norm{constants.alpha, ck.split, m.covariance(), ck.base.Ctilde(), ck.s};
  SemimetricParams sp{constants.a, constants.R, constants.eps};
  const double bound = std::exp(-constants.c);

  ContractionReport rep;
  rep.pairs.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const SpectralVector xg = m.to_grid(pairs[p].first), yg = m.to_grid(pairs[p].second);
    const SpectralVector xe = m.to_eigen(xg), ye = m.to_eigen(yg);
    ContractionPairResult& res = rep.pairs[p];
    res.bound = bound;
    res.rho0 = semimetric_rho(xe, ye, norm, sp);
    if (res.rho0 == 0.0) {
      res.ok = true;
      res.margin = bound;
      continue;
    }
    std::vector<double> ratios(replicas);
    parallel_for(replicas, threads, [&](std::size_t r) {
      CoupledEngine eng(ck);
      ChainState x = eng.chain().make_state(xg.coefficients());
      ChainState y = eng.chain().make_state(yg.coefficients());
      RngStream rng = RngStream::derive(seed, {p, r});
      bool met = false;
      eng.step(x, y, met, rng);
      std::vector<double> ex(m.dimension()), ey(m.dimension());
      m.basis().to_eigen(x.q, ex);
      m.basis().to_eigen(y.q, ey);
      ratios[r] = semimetric_rho(ex, ey, norm, sp) / res.rho0;
    });
    double sum = 0.0;
    for (double v : ratios) sum += v;
    res.mean_ratio = sum / static_cast<double>(replicas);
    double ss = 0.0;
    for (double v : ratios) ss += (v - res.mean_ratio) * (v - res.mean_ratio);
    res.se = std::sqrt(ss / static_cast<double>(replicas - 1) / static_cast<double>(replicas));
    res.margin = bound + 3.0 * res.se - res.mean_ratio;
    res.ok = res.margin >= 0.0;
    rep.ok = rep.ok && res.ok;
  }
  return rep;
}

}  // namespace phmc
