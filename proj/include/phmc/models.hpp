#pragma once

// Finite-difference targets: transition path sampling on a Dirichlet grid and path
// integral molecular dynamics on a periodic ring.

#include <cstddef>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/model.hpp"
#include "phmc/potential.hpp"

namespace phmc {

struct TpsParams {
  double tau = 1.0;
  std::size_t d = 1;
  std::size_t m = 16;
  std::vector<double> a;  ///< start point, defaults to the origin
  std::vector<double> b;  ///< end point, defaults to the origin
  PointPotential G;
};

/// Grid t_j = tau j/(m+1); state holds the m interior points x_j - M(t_j) with the mean
/// path M(t) = a + (t/tau)(b - a). C = (-Laplacian_D)^{-1}.
class TpsModel final : public Model {
 public:
  explicit TpsModel(TpsParams p);

  std::string kind() const override { return "tps"; }
  std::size_t dimension() const override { return p_.m * p_.d; }
  double weight() const override { return h_; }
  const SpectralOperator& covariance() const override { return C_; }
  const SpectralBasis& basis() const override { return basis_; }
  void apply_covariance(std::span<const double> g, std::span<double> out) const override;
  double precision_quadratic(std::span<const double> x) const override;
  double potential(std::span<const double> x, std::span<double> grad) const override;
  bool has_potential() const override { return !p_.G.is_zero; }
  nlohmann::json describe() const override;

  const TpsParams& params() const { return p_; }
  double grid_time(std::size_t j) const { return p_.tau * static_cast<double>(j) / static_cast<double>(p_.m + 1); }

  /// Discrete eigenvalues h^2 / (4 sin^2(k pi / (2(m+1)))), k = 1..m (no multiplicity).
  static std::vector<double> discrete_eigenvalues(double tau, std::size_t m);
  /// Continuum eigenvalue (tau/(k pi))^2.
  static double continuum_eigenvalue(double tau, std::size_t k);
  /// Continuum trace d tau^2 / 6.
  static double continuum_trace(double tau, std::size_t d);
  /// Dense m x m matrix of -Laplacian_D, row major.
  static std::vector<double> laplacian_matrix(double tau, std::size_t m);

 private:
  TpsParams p_;
  double h_;
  SpectralOperator C_;
  SpectralBasis basis_;
};

struct PimdParams {
  double beta = 1.0;
  double a = 1.0;  ///< positive offset of the precision, C_a = (-Laplacian_P + a I)^{-1}
  std::size_t d = 1;
  std::size_t m = 16;
  PointPotential G;
};

/// Periodic grid t_j = beta j/m, j = 0..m-1.
class PimdModel final : public Model {
 public:
  explicit PimdModel(PimdParams p);

  std::string kind() const override { return "pimd"; }
  std::size_t dimension() const override { return p_.m * p_.d; }
  double weight() const override { return h_; }
  const SpectralOperator& covariance() const override { return C_; }
  const SpectralBasis& basis() const override { return basis_; }
  void apply_covariance(std::span<const double> g, std::span<double> out) const override;
  double precision_quadratic(std::span<const double> x) const override;
  double potential(std::span<const double> x, std::span<double> grad) const override;
  bool has_potential() const override { return !p_.G.is_zero; }
  nlohmann::json describe() const override;

  const PimdParams& params() const { return p_; }

  /// 1 / (a + (4/h^2) sin^2(pi (k-1)/m)), k = 1..m (index k, not sorted).
  static double discrete_eigenvalue(double beta, double a, std::size_t m, std::size_t k);
  /// 1 / (a + omega_k^2), omega_k = 2 pi (k-1)/beta.
  static double continuum_eigenvalue(double beta, double a, std::size_t k);
  /// d beta / (2 sqrt(a)) coth(sqrt(a) beta / 2).
  static double continuum_trace(double beta, double a, std::size_t d);
  /// Dense m x m matrix of -Laplacian_P + a I, row major.
  static std::vector<double> precision_matrix(double beta, double a, std::size_t m);
  /// Frequency index k-1 of each eigen mode in covariance order.
  const std::vector<std::size_t>& mode_frequency() const { return freq_; }

 private:
  PimdParams p_;
  double h_;
  SpectralOperator C_;
  SpectralBasis basis_;
  std::vector<std::size_t> freq_;
};

/// Builds a model from the config object {model, tau|beta, a, d, m, endpoints, potential}.
ModelPtr build_model(const nlohmann::json& cfg);

}  // namespace phmc
