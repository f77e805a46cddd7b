#pragma once

// Explicit constants of the contraction theory for pHMC: the Foster-Lyapunov bound,
// the contraction bundle (alpha, gamma, a, epsilon, R, c, C), the mixing-time bound,
// the dimension-free TPS/PIMD pipelines, and the eigenvalue comparison checks.
//
// Rates and prefactors involve exp(+-R/T) and routinely leave the double range, so
// c, epsilon and C are stored alongside their natural logarithms.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/coupling.hpp"
#include "phmc/drift_constants.hpp"

namespace phmc {

/// A quantitative condition lhs <= rhs.
struct ConditionReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
  double ratio() const { return lhs / rhs; }
};

nlohmann::json to_json(const ConditionReport& r);

/// L T^2 <= K/(48 L), compared with relative tolerance 1e-12.
ConditionReport lyapunov_condition(const DriftConstants& c, double T);

/// (1 - K T^2/2) |x|_s^2 + 5 (A + trace) T^2. Throws ConditionError when
/// lyapunov_condition fails.
double lyapunov_bound(double x_norm2, const DriftConstants& c, double trace_term, double T);

/// Minimal admissible R = 8 sqrt(40) (A + trace)^{1/2} sigma_max L K^{-1/2}.
double minimal_R(const DriftConstants& c, double sigma_max, double trace_term);

/// (sigma_max/sigma_min) L T^2 <= min(K/(48 L), sigma_min / (256 L R^2 sigma_max)).
ConditionReport contraction_condition(const DriftConstants& c, double sigma_min, double sigma_max,
                                      double R, double T);

struct TheoremConstants {
  double L = 0, K = 0, A = 0;
  std::size_t n = 0;
  double sigma_min = 0, sigma_max = 0, trace_term = 0, T = 0;
  double alpha = 0, gamma = 0, a = 0;
  double R = 0, R_min = 0;
  double eps = 0, log_eps = 0;
  double c = 0, log_c = 0;
  double C_cor = 0, log_C = 0;
  ConditionReport condition;
};

nlohmann::json to_json(const TheoremConstants& t);

/// Full bundle; R defaults to the minimal admissible value. Throws ConditionError when
/// the contraction condition fails (use contraction_condition to inspect first).
TheoremConstants contraction_constants(const DriftConstants& drift, double sigma_min,
                                       double sigma_max, double trace_term, double T,
                                       std::optional<double> R = std::nullopt);

struct MixingTime {
  double bound = 0.0;                  ///< (1/c) log(numerator/delta), may be +inf
  std::optional<std::uint64_t> steps;  ///< ceiling when representable
  double log10_bound = 0.0;            ///< log10 of bound (-inf when bound is 0)
  double log_numerator = 0.0;
};

/// Iterations guaranteeing L1 Wasserstein distance <= delta from initial first moment
/// M1. Requires T in (0, R).
MixingTime mixing_time(const TheoremConstants& k, double delta, double M1);
/// Same with log(delta) given directly.
MixingTime mixing_time_log(const TheoremConstants& k, double log_delta, double M1);
/// log of C (1 + sqrt(eps) M1 + K^{-1/2} e^{-R/(2T)} / 4).
double mixing_log_numerator(const TheoremConstants& k, double M1);

/// Dimension-free constants for a discretized model family.
struct ModelConstants {
  std::string model;
  double kappa = 0;
  std::size_t m_l = 0, n = 0, m_star = 0;
  double L = 0, K = 0, A = 0;
  double trace_bound = 0;
  double sigma_max_bound = 0;
  double alpha = 0, gamma = 0, a = 0;
  double R = 0;
  double c = 0, log_c = 0;
  double C = 0, log_C = 0;
  double eps = 0, log_eps = 0;
  ConditionReport condition;
  bool condition_ok = false;
  double T = 0;
};

nlohmann::json to_json(const ModelConstants& c);

ModelConstants tps_constants(double tau, std::size_t d, double M_G, double L_G, double T);
ModelConstants pimd_constants(double beta, double a, std::size_t d, double M_G, double L_G, double T);

/// Largest T satisfying the model condition for TPS or PIMD; infinity when the
/// condition does not bind (L_G = 0).
double tps_max_T(double tau, std::size_t d, double M_G, double L_G);
double pimd_max_T(double beta, double a, std::size_t d, double M_G, double L_G);

struct EigenLemmaReport {
  std::string model;
  std::size_t m = 0;
  std::size_t checked = 0;
  double max_violation_bracket = 0.0;  ///< discrete vs continuum bracket, relative to lambda
  double max_violation_ratio = 0.0;    ///< square-root eigenvalue ratio bound
  bool ok(double tol = 1e-12) const { return max_violation_bracket <= tol && max_violation_ratio <= tol; }
};

/// params: {"tau"} for tps, {"beta", "a"} for pimd.
EigenLemmaReport eigenvalue_lemma_check(const std::string& model, const nlohmann::json& params,
                                        std::size_t m);

struct ImplicationSweep {
  std::size_t points = 0;
  std::size_t model_condition_held = 0;
  std::size_t implication_failures = 0;
  std::size_t R_failures = 0;  ///< model R below the minimal admissible R
  double worst_ratio = 0.0;    ///< max lhs/rhs of the general condition
  bool ok() const { return implication_failures == 0 && R_failures == 0 && model_condition_held > 0; }
};

/// Samples parameters with at least one low mode and T inside the model condition, then
/// evaluates the general condition with the discrete sigma bounds and trace of a
/// truncation with m > m*.
ImplicationSweep tps_implication_sweep(std::size_t points, std::uint64_t seed);
ImplicationSweep pimd_implication_sweep(std::size_t points, std::uint64_t seed);

struct ContractionPairResult {
  double rho0 = 0.0;
  double mean_ratio = 0.0;
  double se = 0.0;
  double bound = 0.0;  ///< e^{-c}
  double margin = 0.0; ///< bound + 3 se - mean_ratio
  bool ok = false;
};

struct ContractionReport {
  std::vector<ContractionPairResult> pairs;
  bool ok = true;
};

/// For each (x, y) estimates E[rho(X', Y')] / rho(x, y) over `replicas` coupled steps.
/// Pairs are grid vectors; rho uses eigen coordinates with the bundle's alpha, a, R, eps.
ContractionReport empirical_contraction_check(const CouplingKernel& kernel,
                                              const TheoremConstants& constants,
                                              const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs,
                                              std::size_t replicas, std::uint64_t seed,
                                              std::size_t threads = 1);

}  // namespace phmc
