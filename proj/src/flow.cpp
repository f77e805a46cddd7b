#include "phmc/flow.hpp"

#include <cmath>

#include "phmc/error.hpp"

namespace phmc {

DriftConstants::DriftConstants(double L, double K, double A, std::size_t n)
    : L_(L), K_(K), A_(A), n_(n) {
  if (!(L >= 1.0)) throw ConfigError("L", "Lipschitz constant must satisfy L >= 1");
  if (!(K > 0.0)) throw ConfigError("K", "must be positive");
  if (!(A >= 0.0)) throw ConfigError("A", "must be non-negative");
  if (K > L) throw ConfigError("K", "drift constants must satisfy K <= L");
}

nlohmann::json to_json(const DriftConstants& c) {
  return {{"L", c.L()}, {"K", c.K()}, {"A", c.A()}, {"n", c.n()}};
}

void PhasePoint::check() const {
  if (q.size() != v.size()) throw DimensionError("PhasePoint", q.size(), v.size());
  if (q.representation() != v.representation())
    throw ConfigError("PhasePoint", "q and v must share a representation");
}

SpectralVector Drift::operator()(const SpectralVector& x) const {
  SpectralVector out = x;
  std::vector<double> F(x.size(), 0.0);
  if (force) force(x.coefficients(), F);
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = (linear == LinearPart::harmonic ? -x[i] : 0.0) - F[i];
  return out;
}

Drift Drift::from_model(const Model& model, LinearPart linear) {
  Drift d;
  d.linear = linear;
  d.representation = Representation::grid;
  if (model.has_potential())
    d.force = [&model](std::span<const double> q, std::span<double> out) { return model.force(q, out); };
  return d;
}

Drift Drift::linear_only(LinearPart linear, Representation rep) {
  Drift d;
  d.linear = linear;
  d.representation = rep;
  return d;
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("kernel.dt", "step size must be positive");
}

std::string to_string(Scheme s) {
  return s == Scheme::exact_linear ? "exact-linear" : "symmetric-splitting";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "exact-linear") return Scheme::exact_linear;
  if (s == "symmetric-splitting") return Scheme::symmetric_splitting;
  throw ConfigError("kernel.scheme", "unknown scheme '" + s + "'");
}

void linear_flow(std::span<double> q, std::span<double> v, double t, LinearPart linear) {
  if (linear == LinearPart::free) {
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += t * v[i];
    return;
  }
  const double c = std::cos(t), s = std::sin(t);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q[i], vi = v[i];
    q[i] = c * qi + s * vi;
    v[i] = -s * qi + c * vi;
  }
}

PhasePoint flow_rotation(const PhasePoint& z, double t) {
  z.check();
  PhasePoint out = z;
  linear_flow(out.q.coefficients(), out.v.coefficients(), t, LinearPart::harmonic);
  return out;
}

PhasePoint flow_translation(const PhasePoint& z, double t) {
  z.check();
  PhasePoint out = z;
  linear_flow(out.q.coefficients(), out.v.coefficients(), t, LinearPart::free);
  return out;
}

PhasePoint flow_kick(const PhasePoint& z, double t, const ForceFn& force) {
  z.check();
  PhasePoint out = z;
  if (!force) return out;
  std::vector<double> F(z.q.size());
  force(z.q.coefficients(), F);
  for (std::size_t i = 0; i < F.size(); ++i) out.v[i] -= t * F[i];
  return out;
}

PhasePoint flow_kick(const PhasePoint& z, double t, const Model& model) {
  z.check();
  const SpectralVector qg = model.to_grid(z.q);
  std::vector<double> F(qg.size());
  model.force(qg.coefficients(), F);
  SpectralVector Fv = SpectralVector::grid(std::move(F), model.weight());
  if (z.v.representation() == Representation::eigen) Fv = model.to_eigen(Fv);
  PhasePoint out = z;
  for (std::size_t i = 0; i < Fv.size(); ++i) out.v[i] -= t * Fv[i];
  return out;
}

std::size_t step_count(double T, double dt) {
  if (!(T >= 0.0)) throw ConfigError("T", "duration must be non-negative");
  if (T == 0.0) return 0;
  const double r = T / dt;
  auto n = static_cast<std::size_t>(std::ceil(r * (1.0 - 1e-12)));
  return n == 0 ? 1 : n;
}

SplittingIntegrator::SplittingIntegrator(ForceFn force, LinearPart linear, double weight,
                                         std::size_t dim)
    : force_(std::move(force)), linear_(linear), weight_(weight), F_(dim, 0.0) {}

void SplittingIntegrator::prime(std::span<const double> q) {
  if (force_) {
    U_ = force_(q, F_);
  } else {
    std::fill(F_.begin(), F_.end(), 0.0);
    U_ = 0.0;
  }
}

void SplittingIntegrator::prime(std::span<const double> force, double U) {
  std::copy(force.begin(), force.end(), F_.begin());
  U_ = U;
}

void SplittingIntegrator::check(std::span<const double> q, std::span<const double> v,
                                std::size_t index) const {
  double nq = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i]) || !std::isfinite(v[i]))
      throw DivergenceError(index, "non-finite state");
    nq += q[i] * q[i];
  }
  if (weight_ * nq > 1e16) throw DivergenceError(index, "position norm exceeds 1e8");
}

void SplittingIntegrator::step(std::span<double> q, std::span<double> v, double dt,
                               std::size_t index) {
  const std::size_t n = q.size();
  if (force_)
    for (std::size_t i = 0; i < n; ++i) v[i] -= 0.5 * dt * F_[i];
  linear_flow(q, v, dt, linear_);
  if (force_) {
    check(q, v, index);
    U_ = force_(q, F_);
    for (std::size_t i = 0; i < n; ++i) v[i] -= 0.5 * dt * F_[i];
  }
  check(q, v, index);
}

void SplittingIntegrator::run(std::span<double> q, std::span<double> v, std::size_t steps,
                              double dt, double last_dt, const TrajectoryObserver& observer) {
  double t = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double h = s == steps ? last_dt : dt;
    step(q, v, h, s);
    t += h;
    if (observer) observer(s, t, q, v);
  }
}

PhasePoint splitting_step(const PhasePoint& z, const IntegratorConfig& cfg, const Drift& drift) {
  z.check();
  cfg.validate();
  PhasePoint out = z;
  SplittingIntegrator integ(drift.force, drift.linear, z.q.weight(), z.q.size());
  integ.prime(out.q.coefficients());
  integ.step(out.q.coefficients(), out.v.coefficients(), cfg.dt, 1);
  return out;
}

PhasePoint flow_ode(const PhasePoint& z, double T, const IntegratorConfig& cfg, const Drift& drift,
                    const TrajectoryObserver& observer) {
  z.check();
  cfg.validate();
  if (!drift.is_linear() && z.q.representation() != drift.representation)
    throw ConfigError("flow_ode", "state representation does not match the drift");
  const std::size_t steps = step_count(T, cfg.dt);
  PhasePoint out = z;
  if (steps == 0) return out;
  const double last = T - static_cast<double>(steps - 1) * cfg.dt;
  if (drift.is_linear() && !observer) {
    linear_flow(out.q.coefficients(), out.v.coefficients(), T, drift.linear);
    return out;
  }
  if (cfg.scheme == Scheme::exact_linear && !drift.is_linear())
    throw ConfigError("kernel.scheme", "exact-linear scheme requires a linear drift");
  SplittingIntegrator integ(drift.force, drift.linear, z.q.weight(), z.q.size());
  integ.prime(out.q.coefficients());
  integ.run(out.q.coefficients(), out.v.coefficients(), steps, cfg.dt, last, observer);
  return out;
}

double calibrate_exact_dt(const PhasePoint& z, double T, const Drift& drift, double dt0, double tol) {
  if (!(dt0 > 0.0)) throw ConfigError("dt0", "must be positive");
  if (drift.is_linear() || T == 0.0) return std::min(dt0, T > 0.0 ? T : dt0);
  double dt = std::min(dt0, T);
  IntegratorConfig cfg{dt, Scheme::symmetric_splitting};
  PhasePoint a = flow_ode(z, T, cfg, drift);
  for (int iter = 0; iter < 40; ++iter) {
    cfg.dt = dt / 2.0;
    PhasePoint b = flow_ode(z, T, cfg, drift);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.q.size(); ++i) diff += (a.q[i] - b.q[i]) * (a.q[i] - b.q[i]);
    diff = std::sqrt(z.q.representation() == Representation::grid ? z.q.weight() * diff : diff);
    if (diff < tol) return dt;
    dt /= 2.0;
    a = std::move(b);
  }
  throw ConfigError("dt", "exact-mode calibration did not converge after 40 halvings");
}

}  // namespace phmc
