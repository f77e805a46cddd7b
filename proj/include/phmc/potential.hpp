#pragma once

// Point potentials G: R^d -> R with their gradients, the named experiment library, and a
// numerical audit of the declared bounds.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/rng.hpp"

namespace phmc {

/// Returns G(u); writes grad G(u) into grad when grad is non-empty.
using PointEval = std::function<double(std::span<const double> u, std::span<double> grad)>;

struct PointPotential {
  std::string name;
  std::size_t dim = 1;
  /// Declared sup |grad G| and Lipschitz constant of grad G (infinity when unbounded).
  double M_G = std::numeric_limits<double>::infinity();
  double L_G = std::numeric_limits<double>::infinity();
  bool is_zero = false;
  PointEval eval;
  nlohmann::json params = nlohmann::json::object();

  double value(std::span<const double> u) const { return eval(u, {}); }
  std::vector<double> gradient(std::span<const double> u) const;
};

/// Names: zero, quadratic, quadratic_cosine, normal_mixture, laplace_mixture, banana,
/// three_well. Every entry accepts "quadratic_shift" c and then returns G - c|u|^2/2.
/// Throws ConfigError for unknown names or bad parameters.
PointPotential potential_library(const std::string& name, const nlohmann::json& params,
                                 std::size_t dim);

/// G = |grad Psi|^2 / 2 - (Laplacian Psi) / 2. Without grad_G the gradient of G is taken
/// by central differences.
PointPotential girsanov_potential(std::size_t dim,
                                  std::function<void(std::span<const double>, std::span<double>)> grad_psi,
                                  std::function<double(std::span<const double>)> laplacian_psi,
                                  double M_G, double L_G,
                                  std::function<void(std::span<const double>, std::span<double>)> grad_G = {});

struct PotentialReport {
  double grad_at_zero = 0.0;       ///< |grad G(0)|
  double max_grad = 0.0;           ///< max |grad G| over the sampled points
  double max_fd_rel_error = 0.0;   ///< gradient vs central differences of the value
  double lipschitz_estimate = 0.0; ///< max |grad G(u) - grad G(u')| / |u - u'|
  bool grad_zero_ok = false;
  bool bound_ok = false;
  bool fd_ok = false;
  bool lipschitz_ok = false;
  std::size_t samples = 0;
  bool ok() const { return grad_zero_ok && bound_ok && fd_ok && lipschitz_ok; }
};

/// Samples points uniformly in the cube [-radius, radius]^d.
PotentialReport validate_point_potential(const PointPotential& G, RngStream& rng,
                                         std::size_t samples = 10000, double radius = 5.0);

nlohmann::json to_json(const PotentialReport& r);

}  // namespace phmc
