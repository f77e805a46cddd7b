#pragma once

// Two-scale coupling of two pHMC chains: maximal coupling with reflection on the low
// modes, synchronous velocities on the high modes, shared step counts and accept
// uniforms. Coalescence is declared once the alpha-norm distance drops below a
// threshold, after which Y follows X forever.
//
// Random draws per coupled transition, in order: N normals (eigen velocity), one
// uniform for the maximal-coupling test, the step-count uniform when geometric, and
// the accept uniform when Metropolis is on (a second one for Y when uniforms are not
// shared).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/metrics.hpp"
#include "phmc/sampler.hpp"

namespace phmc {

enum class GammaRule { zero, one_over_T, cot_T, theorem, fixed };

struct GammaSpec {
  GammaRule rule = GammaRule::zero;
  double value = 0.0;  ///< used by `fixed`
  double R = 0.0;      ///< used by `theorem`: gamma = min(1/T, 1/(4R))

  static GammaSpec parse(const std::string& s);
  std::string name() const;
};

/// Resolves the rule at duration T. cot T is clamped below at 0 (T > pi/2).
double resolve_gamma(const GammaSpec& g, double T);

struct CouplingKernel {
  PhmcKernel base;
  GammaSpec gamma;
  ModeSplit split;
  double meet_threshold = 1e-8;
  /// alpha and s of the distance used for the meeting test.
  double alpha = 1.0;
  SobolevIndex s{0.0};
  bool shared_uniform = true;

  void validate() const;
  AlphaNorm distance_norm() const;
};

struct CoupledPair {
  SpectralVector X;
  SpectralVector Y;
  bool coalesced = false;
};

/// C~^{1/2} (I - 2 e <e, .>) C~^{-1/2} xi with e = C~^{-1/2} z / |C~^{-1/2} z|. Inputs
/// are eigen coordinates; z must be non-zero.
SpectralVector reflection_apply(const SpectralVector& xi, const SpectralVector& z,
                                const SpectralOperator& Ctilde);

/// exp(<C~^{-1} h, x> - <C~^{-1} h, h>/2).
double max_coupling_density(const SpectralVector& h, const SpectralVector& x,
                            const SpectralOperator& Ctilde);

struct CoupledInfo {
  bool shift_event = false;  ///< low velocities coupled by the shift (not reflected)
  bool accepted_x = true;
  bool accepted_y = true;
  std::uint64_t steps = 0;
  double distance = 0.0;     ///< alpha-norm distance after the step (before coalescing)
};

/// Per-worker engine for coupled transitions on grid-valued chain states.
class CoupledEngine {
 public:
  explicit CoupledEngine(const CouplingKernel& kernel);

  const CouplingKernel& kernel() const { return kernel_; }
  TransitionEngine& chain() { return engine_; }

  /// Distance ||x - y||_alpha of two grid states.
  double distance(const ChainState& x, const ChainState& y);

  CoupledInfo step(ChainState& x, ChainState& y, bool& coalesced, RngStream& rng);

 private:
  CouplingKernel kernel_;
  double gamma_;
  AlphaNorm norm_;
  TransitionEngine engine_;
  std::vector<double> xi_, eta_, z_, diff_;
};

CoupledPair coupled_step(const CoupledPair& pair, const CouplingKernel& kernel, RngStream& rng,
                         CoupledInfo* info = nullptr);

struct FailureProbability {
  double empirical = 0.0;  ///< frequency of the reflection branch
  double se = 0.0;
  double tv_exact = 0.0;   ///< 2 (Phi(h/2) - 1/2)
  double bound = 0.0;      ///< h / sqrt(2 pi)
  double h = 0.0;          ///< |gamma C~^{-1/2} z|
};

/// z is the low block in eigen coordinates (any length up to C~'s dimension).
FailureProbability coupling_failure_probability(const SpectralVector& z, double gamma,
                                                const SpectralOperator& Ctilde,
                                                std::size_t n_samples, RngStream& rng);

struct CouplingTimeConfig {
  std::vector<GammaSpec> rules;
  std::vector<double> T_grid;
  std::size_t replicas = 100;
  std::size_t max_steps = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct CouplingTimeRow {
  std::string gamma_rule;
  double T = 0.0;
  std::size_t replica = 0;
  std::size_t meet_steps = 0;
  bool censored = false;
};

struct CouplingTimeSummary {
  std::string gamma_rule;
  double T = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double se = 0.0;
  std::size_t censored = 0;
  std::size_t replicas = 0;
};

struct CouplingTimeResult {
  std::vector<CouplingTimeRow> rows;
  std::vector<CouplingTimeSummary> summary;
};

/// For each T and each rule, runs `replicas` coupled chains from (x0, y0) until the
/// meeting distance is within the threshold. `templ` supplies everything but T and
/// gamma; its kernel's mean step count is rescaled to T/dt. Replica r at T index t uses
/// the stream derive_seed(seed, {t, r}) for every rule (common random numbers).
CouplingTimeResult coupling_time_experiment(const SpectralVector& x0, const SpectralVector& y0,
                                            const CouplingKernel& templ,
                                            const CouplingTimeConfig& cfg);

/// Per-step mean coupled distance |X_k - Y_k|_s with standard errors, an upper bound
/// on the L1 Wasserstein distance between the chains' laws at step k.
using InitialSampler = std::function<SpectralVector(RngStream&)>;
std::vector<DecayPoint> empirical_wasserstein_decay(const CouplingKernel& kernel,
                                                    const InitialSampler& x0,
                                                    const InitialSampler& y0, std::size_t k_steps,
                                                    std::size_t replicas, std::uint64_t seed,
                                                    std::size_t threads = 1);

}  // namespace phmc
