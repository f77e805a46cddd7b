#pragma once

// Hamiltonian flow of dq/dt = v, dv/dt = b(q) with b(x) = -x - F(x): closed-form
// rotation for the linear part, kicks for F, and the palindromic splitting
//   psi_dt = kick(dt/2) o rotate(dt) o kick(dt/2).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phmc/drift_constants.hpp"
#include "phmc/model.hpp"
#include "phmc/spectral.hpp"

namespace phmc {

struct PhasePoint {
  SpectralVector q;
  SpectralVector v;

  /// Throws when q and v disagree in dimension or representation.
  void check() const;
};

/// Linear part of the drift: harmonic (-x, the preconditioned Gaussian part) or free
/// (zero, straight-line motion).
enum class LinearPart { harmonic, free };

/// Writes F(q) into out and returns U_m(q) (0 when the force has no potential).
using ForceFn = std::function<double(std::span<const double> q, std::span<double> out)>;

struct Drift {
  LinearPart linear = LinearPart::harmonic;
  ForceFn force;  ///< empty means F = 0
  Representation representation = Representation::grid;
  std::optional<DriftConstants> constants;

  bool is_linear() const { return !static_cast<bool>(force); }
  /// b(x) = -x - F(x) (harmonic) or -F(x) (free).
  SpectralVector operator()(const SpectralVector& x) const;

  /// b(x) = -x - C grad G_m(x) on grid values of the model.
  static Drift from_model(const Model& model, LinearPart linear = LinearPart::harmonic);
  static Drift linear_only(LinearPart linear, Representation rep);
};

enum class Scheme { exact_linear, symmetric_splitting };

struct IntegratorConfig {
  double dt = 0.1;
  Scheme scheme = Scheme::symmetric_splitting;

  void validate() const;
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// (cos t q + sin t v, -sin t q + cos t v).
PhasePoint flow_rotation(const PhasePoint& z, double t);
/// (q + t v, v).
PhasePoint flow_translation(const PhasePoint& z, double t);
/// v <- v - t F(q).
PhasePoint flow_kick(const PhasePoint& z, double t, const ForceFn& force);
/// v <- v - t C grad G_m(q); q and v may be in either representation.
PhasePoint flow_kick(const PhasePoint& z, double t, const Model& model);

PhasePoint splitting_step(const PhasePoint& z, const IntegratorConfig& cfg, const Drift& drift);

/// Called after every step with (step index starting at 1, time, q, v).
using TrajectoryObserver =
    std::function<void(std::size_t, double, std::span<const double>, std::span<const double>)>;

/// Integrates over [0, T]. Exact for linear drifts; otherwise ceil(T/dt) splitting
/// steps with the last one shortened so the duration is hit exactly.
/// Throws DivergenceError on a non-finite state or when |q| exceeds 1e8.
PhasePoint flow_ode(const PhasePoint& z, double T, const IntegratorConfig& cfg, const Drift& drift,
                    const TrajectoryObserver& observer = {});

/// Number of steps used by flow_ode for duration T.
std::size_t step_count(double T, double dt);

/// Largest dt = dt0 / 2^j whose halving moves q_T by less than tol.
double calibrate_exact_dt(const PhasePoint& z, double T, const Drift& drift, double dt0,
                          double tol = 1e-10);

/// The splitting integrator on raw coordinate buffers with the force cached between
/// steps, so each step costs one force evaluation.
class SplittingIntegrator {
 public:
  SplittingIntegrator(ForceFn force, LinearPart linear, double weight, std::size_t dim);

  /// Evaluates and caches F(q) and U_m(q).
  void prime(std::span<const double> q);
  /// Installs a previously computed cache for q.
  void prime(std::span<const double> force, double U);

  /// One step of size dt. `index` is reported in divergence errors.
  void step(std::span<double> q, std::span<double> v, double dt, std::size_t index);

  /// Runs `steps` steps of size dt, the last one of size last_dt.
  void run(std::span<double> q, std::span<double> v, std::size_t steps, double dt, double last_dt,
           const TrajectoryObserver& observer = {});

  double potential() const noexcept { return U_; }
  std::span<const double> cached_force() const noexcept { return F_; }

 private:
  void check(std::span<const double> q, std::span<const double> v, std::size_t index) const;

  ForceFn force_;
  LinearPart linear_;
  double weight_;
  std::vector<double> F_;
  double U_ = 0.0;
};

/// Exact linear motion of (q, v) for time t.
void linear_flow(std::span<double> q, std::span<double> v, double t, LinearPart linear);

}  // namespace phmc
