#pragma once

// The pHMC transition kernel: exact (deterministic duration, no accept/reject) and the
// Metropolis-adjusted numerical variant with geometric step counts.
//
// Random draws per transition, in order: N standard normals for the velocity (eigen
// coordinates), one uniform for the step count when it is geometric, one uniform for
// the accept test when Metropolis is on. Rejected proposals consume the same draws.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/flow.hpp"
#include "phmc/model.hpp"
#include "phmc/rng.hpp"
#include "phmc/spectral.hpp"

namespace phmc {

struct DurationRule {
  enum class Kind { deterministic, geometric_steps };
  Kind kind = Kind::deterministic;
  /// Mean number of steps in the geometric case; success probability is 1/mean_steps.
  double mean_steps = 1.0;

  static DurationRule deterministic() { return {}; }
  static DurationRule geometric(double mean_steps) { return {Kind::geometric_steps, mean_steps}; }
};

std::string to_string(DurationRule::Kind k);
DurationRule::Kind duration_kind_from_string(const std::string& s);

struct PhmcKernel {
  double T = 1.0;
  DurationRule duration;
  IntegratorConfig integrator;
  ModelPtr model;
  /// Velocity covariance C~ in eigen coordinates; defaults to the model covariance.
  std::optional<SpectralOperator> velocity_covariance;
  bool metropolis = false;
  /// Linear part of the dynamics. `free` is for tests of the coupling identities.
  LinearPart linear = LinearPart::harmonic;

  void validate() const;
  const SpectralOperator& Ctilde() const;

  /// Kernel with geometric step counts of mean T/dt and Metropolis adjustment.
  static PhmcKernel randomized(ModelPtr model, double T, double dt);
  /// Kernel with deterministic duration T and no accept/reject.
  static PhmcKernel exact(ModelPtr model, double T, double dt);
};

nlohmann::json to_json(const PhmcKernel& k);

/// Position plus the force and potential cached at that position.
struct ChainState {
  std::vector<double> q;  ///< grid values
  std::vector<double> F;  ///< C grad G_m(q)
  double U = 0.0;
};

struct TransitionInfo {
  std::uint64_t steps = 0;
  bool accepted = true;
  double accept_prob = 1.0;
  double energy = 0.0;        ///< energy of (x, xi) at the start
  double energy_error = 0.0;  ///< H(proposal) - H(start)
};

/// Per-worker evaluator of one kernel; holds scratch buffers, not thread safe.
class TransitionEngine {
 public:
  explicit TransitionEngine(const PhmcKernel& kernel);

  const PhmcKernel& kernel() const { return kernel_; }
  const Model& model() const { return *kernel_.model; }

  ChainState make_state(std::span<const double> q_grid) const;

  /// xi ~ N(0, C~) in eigen coordinates.
  void sample_velocity(RngStream& rng, std::span<double> xi) const;
  /// Geometric draw (one uniform) or the deterministic count (no draw).
  std::uint64_t sample_steps(RngStream& rng) const;
  /// One uniform when Metropolis is on, otherwise 0 without a draw.
  double sample_accept(RngStream& rng) const;

  /// Moves x with eigen velocity xi for k steps and applies the accept test with
  /// uniform u. On rejection x is unchanged.
  TransitionInfo transition(ChainState& x, std::span<const double> xi, std::uint64_t k, double u);

  /// Full transition with fresh draws from rng.
  TransitionInfo step(ChainState& x, RngStream& rng);

 private:
  PhmcKernel kernel_;
  std::vector<double> v_, q_, xi_;
  SplittingIntegrator integ_;
};

/// X' = q_T(x, xi), xi ~ N(0, C~) (deterministic duration, no Metropolis). Returns the
/// result in the representation of x.
SpectralVector phmc_step(const SpectralVector& x, const PhmcKernel& kernel, RngStream& rng);

struct StepResult {
  SpectralVector next;
  bool accepted = true;
  std::uint64_t steps = 0;
  double accept_prob = 1.0;
  double energy_error = 0.0;
};

/// Metropolis-adjusted step with geometric step count.
StepResult randomized_phmc_step(const SpectralVector& x, const PhmcKernel& kernel, RngStream& rng);

struct ChainRecord {
  std::size_t step = 0;
  bool accepted = true;
  std::uint64_t k = 0;
  double energy = 0.0;
  std::span<const double> coordinates;  ///< eigen coordinates after the step
};

class ChainSink {
 public:
  virtual ~ChainSink() = default;
  virtual void record(const ChainRecord& r) = 0;
};

struct ChainStats {
  std::size_t steps = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  double mean_k = 0.0;
  std::vector<double> mean;      ///< per-mode running mean (eigen coordinates)
  std::vector<double> variance;  ///< per-mode running variance (population)
  SpectralVector final_state;
};

nlohmann::json to_json(const ChainStats& s);

/// Iterates the kernel n_steps times from x0. Metropolis kernels use the randomized
/// step; others use the exact step.
ChainStats run_chain(const SpectralVector& x0, const PhmcKernel& kernel, std::size_t n_steps,
                     RngStream& rng, ChainSink* sink = nullptr);

}  // namespace phmc
