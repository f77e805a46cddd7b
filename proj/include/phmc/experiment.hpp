#pragma once

// Configuration-driven experiment runner behind the command line tool: builds models and
// kernels from a config document, runs one command, and writes the manifest, CSV
// results, plot data and SVG charts into an output directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/coupling.hpp"
#include "phmc/sampler.hpp"
#include "phmc/theory.hpp"

namespace phmc {

std::string library_version();

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_config = 2, exit_divergence = 3 };

struct RunOptions {
  std::filesystem::path out = "phmc-out";
  std::optional<std::uint64_t> seed;  ///< overrides the config seed
  std::size_t threads = 0;            ///< 0: config value, PHMC_THREADS or hardware
};

/// Runs config["command"] (sample, couple, coupling-times, constants, check-conditions,
/// validate, tune). Progress and errors go to `log`. On any failure the files written so
/// far are removed. Returns an ExitCode.
int run_experiment(const nlohmann::json& config, const RunOptions& options, std::ostream& log);

/// Kernel from the "kernel" section: {T, dt, metropolis, duration, mean_steps, scheme}.
PhmcKernel kernel_from_config(ModelPtr model, const nlohmann::json& kernel_cfg);

/// Initial state in grid coordinates. spec: "zero", {"grid": [...]}, {"eigen": [...]},
/// {"constant": [point]}, {"circle": {"center": [...], "radius": r}} or "prior".
SpectralVector initial_state(const Model& model, const nlohmann::json& spec, RngStream& rng);

/// Model constants from the declared potential bounds; `overrides` may set M_G and L_G.
ModelConstants model_constants(const Model& model, double T, const nlohmann::json& overrides = {});

struct TuneTrial {
  double dt = 0.0;
  double acceptance = 0.0;
};

struct TuneResult {
  double dt = 0.0;
  double acceptance = 0.0;
  std::vector<TuneTrial> trace;
};

/// Halves dt from T until the acceptance rate of a randomized Metropolis chain of
/// `trial_steps` steps started at x0 reaches `target`, then bisects in log dt until the
/// rate lies in [target, target + 0.005]. Every trial uses the same random stream.
/// Returns T when T itself is accepted often enough; throws Error once dt would drop
/// below 1e-6.
TuneResult tune_stepsize(ModelPtr model, double T, const SpectralVector& x0, double target,
                         std::uint64_t seed, std::size_t trial_steps = 1000);

struct KsModeResult {
  std::string component;  ///< "X" or "Y"
  std::size_t mode = 0;
  double statistic = 0.0;
  double critical = 0.0;
  bool ok = false;
};

/// Compares per-mode samples of each coupled component with independent single-chain
/// transitions from the same start (two-sample KS at level 0.01).
std::vector<KsModeResult> coupling_marginal_check(const CouplingKernel& kernel,
                                                  const SpectralVector& x, const SpectralVector& y,
                                                  const std::vector<std::size_t>& modes,
                                                  std::size_t samples, std::uint64_t seed,
                                                  std::size_t threads = 1);

struct CheckResult {
  std::string name;
  bool ok = false;
  nlohmann::json detail;
};

/// The property suite run by the validate command.
std::vector<CheckResult> validation_suite(std::uint64_t seed, std::size_t threads, bool quick);

}  // namespace phmc
