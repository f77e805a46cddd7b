#include "phmc/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "phmc/error.hpp"

namespace phmc {

std::string to_string(DurationRule::Kind k) {
  return k == DurationRule::Kind::deterministic ? "deterministic" : "geometric-steps";
}

DurationRule::Kind duration_kind_from_string(const std::string& s) {
  if (s == "deterministic") return DurationRule::Kind::deterministic;
  if (s == "geometric-steps" || s == "geometric") return DurationRule::Kind::geometric_steps;
  throw ConfigError("kernel.duration", "unknown duration rule '" + s + "'");
}

void PhmcKernel::validate() const {
  if (!model) throw ConfigError("kernel.model", "no model attached");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("kernel.T", "must be positive");
  integrator.validate();
  if (duration.kind == DurationRule::Kind::geometric_steps && !(duration.mean_steps >= 1.0))
    throw ConfigError("kernel.duration.mean_steps", "must be at least 1");
  if (velocity_covariance) {
    if (velocity_covariance->dimension() != model->dimension())
      throw DimensionError("kernel.velocity_covariance", model->dimension(),
                           velocity_covariance->dimension());
    if (metropolis) {
      const auto a = velocity_covariance->eigenvalues();
      const auto b = model->covariance().eigenvalues();
      if (!std::equal(a.begin(), a.end(), b.begin()))
        throw ConfigError("kernel.velocity_covariance",
                          "Metropolis adjustment requires the velocity covariance to equal C");
    }
  }
}

const SpectralOperator& PhmcKernel::Ctilde() const {
  return velocity_covariance ? *velocity_covariance : model->covariance();
}

PhmcKernel PhmcKernel::randomized(ModelPtr model, double T, double dt) {
  PhmcKernel k;
  k.model = std::move(model);
  k.T = T;
  k.integrator.dt = dt;
  k.duration = DurationRule::geometric(std::max(1.0, T / dt));
  k.metropolis = true;
  return k;
}

PhmcKernel PhmcKernel::exact(ModelPtr model, double T, double dt) {
  PhmcKernel k;
  k.model = std::move(model);
  k.T = T;
  k.integrator.dt = dt;
  k.metropolis = false;
  return k;
}

nlohmann::json to_json(const PhmcKernel& k) {
  nlohmann::json j = {{"T", k.T},
                      {"dt", k.integrator.dt},
                      {"scheme", to_string(k.integrator.scheme)},
                      {"duration", to_string(k.duration.kind)},
                      {"metropolis", k.metropolis},
                      {"linear", k.linear == LinearPart::harmonic ? "harmonic" : "free"}};
  if (k.duration.kind == DurationRule::Kind::geometric_steps) j["mean_steps"] = k.duration.mean_steps;
  if (k.velocity_covariance) j["velocity_covariance"] = to_json(*k.velocity_covariance);
  return j;
}

namespace {

ForceFn engine_force(const PhmcKernel& k) {
  if (!k.model || !k.model->has_potential()) return {};
  const Model* m = k.model.get();
  return [m](std::span<const double> q, std::span<double> out) { return m->force(q, out); };
}

}  // namespace

TransitionEngine::TransitionEngine(const PhmcKernel& kernel)
    : kernel_((kernel.validate(), kernel)),
      v_(kernel.model->dimension()),
      q_(kernel.model->dimension()),
      xi_(kernel.model->dimension()),
      integ_(engine_force(kernel), kernel.linear, kernel.model->weight(), kernel.model->dimension()) {}

ChainState TransitionEngine::make_state(std::span<const double> q_grid) const {
  const std::size_t n = model().dimension();
  if (q_grid.size() != n) throw DimensionError("make_state", n, q_grid.size());
  ChainState s;
  s.q.assign(q_grid.begin(), q_grid.end());
  s.F.assign(n, 0.0);
  s.U = model().has_potential() ? model().force(s.q, s.F) : 0.0;
  return s;
}

void TransitionEngine::sample_velocity(RngStream& rng, std::span<double> xi) const {
  sample_gaussian(kernel_.Ctilde(), rng, xi);
}

std::uint64_t TransitionEngine::sample_steps(RngStream& rng) const {
  if (kernel_.duration.kind == DurationRule::Kind::geometric_steps)
    return rng.geometric(std::min(1.0, 1.0 / kernel_.duration.mean_steps));
  return step_count(kernel_.T, kernel_.integrator.dt);
}

double TransitionEngine::sample_accept(RngStream& rng) const {
  return kernel_.metropolis ? rng.uniform() : 0.0;
}

TransitionInfo TransitionEngine::transition(ChainState& x, std::span<const double> xi,
                                            std::uint64_t k, double u) {
  const Model& mdl = model();
  const std::size_t n = mdl.dimension();
  if (xi.size() != n) throw DimensionError("transition velocity", n, xi.size());
  TransitionInfo info;
  info.steps = k;

  mdl.basis().to_grid(xi, v_);
  std::copy(x.q.begin(), x.q.end(), q_.begin());
  const double Hq = 0.5 * mdl.precision_quadratic(q_);
  info.energy = 0.5 * mdl.precision_quadratic(v_) + x.U + Hq;

  const bool geometric = kernel_.duration.kind == DurationRule::Kind::geometric_steps;
  const double dt = kernel_.integrator.dt;
  if (!mdl.has_potential()) {
    const double total = geometric ? static_cast<double>(k) * dt : kernel_.T;
    linear_flow(q_, v_, total, kernel_.linear);
    for (double qi : q_)
      if (!std::isfinite(qi)) throw DivergenceError(k, "non-finite state");
    integ_.prime(x.F, 0.0);
  } else {
    integ_.prime(x.F, x.U);
    if (geometric) {
      integ_.run(q_, v_, k, dt, dt);
    } else if (kernel_.metropolis) {
      const double h = kernel_.T / static_cast<double>(k);
      integ_.run(q_, v_, k, h, h);
    } else {
      integ_.run(q_, v_, k, dt, kernel_.T - static_cast<double>(k - 1) * dt);
    }
  }

  if (kernel_.metropolis) {
    if (!mdl.has_potential() && kernel_.linear == LinearPart::harmonic) {
      info.accept_prob = 1.0;
      info.energy_error = 0.0;
    } else {
      const double H1 =
          0.5 * mdl.precision_quadratic(v_) + integ_.potential() + 0.5 * mdl.precision_quadratic(q_);
      info.energy_error = H1 - info.energy;
      info.accept_prob = std::isfinite(info.energy_error)
                             ? std::min(1.0, std::exp(-info.energy_error))
                             : 0.0;
    }
    info.accepted = u <= info.accept_prob;
  }
  if (info.accepted) {
    x.q.assign(q_.begin(), q_.end());
    const auto F = integ_.cached_force();
    x.F.assign(F.begin(), F.end());
    x.U = integ_.potential();
  }
  return info;
}

TransitionInfo TransitionEngine::step(ChainState& x, RngStream& rng) {
  sample_velocity(rng, xi_);
  const std::uint64_t k = sample_steps(rng);
  const double u = sample_accept(rng);
  return transition(x, xi_, k, u);
}

namespace {

SpectralVector as_grid(const Model& m, const SpectralVector& x) {
  if (x.size() != m.dimension()) throw DimensionError("state", m.dimension(), x.size());
  return m.to_grid(x);
}

SpectralVector back_to(const Model& m, std::vector<double> q, Representation rep) {
  SpectralVector g = SpectralVector::grid(std::move(q), m.weight());
  return rep == Representation::grid ? g : m.to_eigen(g);
}

}  // namespace

SpectralVector phmc_step(const SpectralVector& x, const PhmcKernel& kernel, RngStream& rng) {
  if (kernel.metropolis) throw ConfigError("kernel.metropolis", "phmc_step requires metropolis = false");
  if (kernel.duration.kind != DurationRule::Kind::deterministic)
    throw ConfigError("kernel.duration", "phmc_step requires a deterministic duration");
  TransitionEngine eng(kernel);
  ChainState s = eng.make_state(as_grid(*kernel.model, x).coefficients());
  eng.step(s, rng);
  return back_to(*kernel.model, std::move(s.q), x.representation());
}

StepResult randomized_phmc_step(const SpectralVector& x, const PhmcKernel& kernel, RngStream& rng) {
  if (!kernel.metropolis) throw ConfigError("kernel.metropolis", "randomized step requires metropolis = true");
  if (kernel.duration.kind != DurationRule::Kind::geometric_steps)
    throw ConfigError("kernel.duration", "randomized step requires geometric step counts");
  TransitionEngine eng(kernel);
  ChainState s = eng.make_state(as_grid(*kernel.model, x).coefficients());
  const TransitionInfo info = eng.step(s, rng);
  StepResult r;
  r.next = back_to(*kernel.model, std::move(s.q), x.representation());
  r.accepted = info.accepted;
  r.steps = info.steps;
  r.accept_prob = info.accept_prob;
  r.energy_error = info.energy_error;
  return r;
}

nlohmann::json to_json(const ChainStats& s) {
  return {{"steps", s.steps},       {"accepted", s.accepted}, {"acceptance_rate", s.acceptance_rate},
          {"mean_k", s.mean_k},     {"mean", s.mean},         {"variance", s.variance}};
}

ChainStats run_chain(const SpectralVector& x0, const PhmcKernel& kernel, std::size_t n_steps,
                     RngStream& rng, ChainSink* sink) {
  if (n_steps < 1) throw ConfigError("steps", "must be at least 1");
  TransitionEngine eng(kernel);
  const Model& m = *kernel.model;
  ChainState s = eng.make_state(as_grid(m, x0).coefficients());
  const std::size_t n = m.dimension();
  ChainStats st;
  st.mean.assign(n, 0.0);
  st.variance.assign(n, 0.0);
  std::vector<double> e(n), m2(n, 0.0);
  double sum_k = 0.0;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    TransitionInfo info;
    try {
      info = eng.step(s, rng);
    } catch (const DivergenceError& err) {
      throw DivergenceError(i, std::string("chain step: ") + err.what());
    }
    if (info.accepted) ++st.accepted;
    sum_k += static_cast<double>(info.steps);
    m.basis().to_eigen(s.q, e);
    const double cnt = static_cast<double>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double delta = e[j] - st.mean[j];
      st.mean[j] += delta / cnt;
      m2[j] += delta * (e[j] - st.mean[j]);
    }
    if (sink) sink->record({i, info.accepted, info.steps, info.energy, e});
  }
  st.steps = n_steps;
  st.acceptance_rate = static_cast<double>(st.accepted) / static_cast<double>(n_steps);
  st.mean_k = sum_k / static_cast<double>(n_steps);
  for (std::size_t j = 0; j < n; ++j) st.variance[j] = m2[j] / static_cast<double>(n_steps);
  st.final_state = back_to(m, std::move(s.q), x0.representation());
  return st;
}

}  // namespace phmc
