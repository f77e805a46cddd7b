#pragma once

// A discretized target measure exp(-U_m(x)) N(0, C)(dx) on a finite grid, together
// with the grid/eigen conversions the samplers need.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/spectral.hpp"

namespace phmc {

class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Quadrature weight w of the discrete inner product <x,y>_w = w sum x_j y_j.
  virtual double weight() const = 0;
  /// Covariance C in eigen coordinates that are orthonormal for <.,.>_w.
  virtual const SpectralOperator& covariance() const = 0;
  virtual const SpectralBasis& basis() const = 0;

  /// out = C g on grid values.
  virtual void apply_covariance(std::span<const double> g, std::span<double> out) const;
  /// <x, C^{-1} x>_w on grid values.
  virtual double precision_quadratic(std::span<const double> x) const;

  /// U_m(x) on grid values; when grad is non-empty it receives the plain (unweighted)
  /// coordinate gradient of U_m.
  virtual double potential(std::span<const double> x, std::span<double> grad) const = 0;
  /// False when U_m vanishes identically; the flow is then the exact rotation.
  virtual bool has_potential() const = 0;

  virtual nlohmann::json describe() const = 0;

  /// out = C grad G_m(x) with grad G_m the gradient for <.,.>_w; returns U_m(x).
  double force(std::span<const double> x, std::span<double> out) const;

  /// Total energy 1/2<v,C^{-1}v>_w + U_m(q) + 1/2<q,C^{-1}q>_w with U_m(q) supplied.
  double energy(std::span<const double> q, std::span<const double> v, double U) const;

  SpectralVector to_grid(const SpectralVector& x) const { return basis().to_grid(x); }
  SpectralVector to_eigen(const SpectralVector& x) const { return basis().to_eigen(x); }
};

using ModelPtr = std::shared_ptr<const Model>;

/// Potential on eigen coordinates of a diagonal model: value, and gradient into grad
/// when it is non-empty.
using CoordinatePotential = std::function<double(std::span<const double>, std::span<double>)>;

/// Model whose grid is the eigenbasis itself (weight 1). Used for abstract Hilbert
/// space experiments and tests.
class DiagonalModel final : public Model {
 public:
  explicit DiagonalModel(SpectralOperator C, CoordinatePotential U = {}, std::string name = "diagonal");

  std::string kind() const override { return "diagonal"; }
  std::size_t dimension() const override { return C_.dimension(); }
  double weight() const override { return 1.0; }
  const SpectralOperator& covariance() const override { return C_; }
  const SpectralBasis& basis() const override { return basis_; }
  void apply_covariance(std::span<const double> g, std::span<double> out) const override;
  double precision_quadratic(std::span<const double> x) const override;
  double potential(std::span<const double> x, std::span<double> grad) const override;
  bool has_potential() const override { return static_cast<bool>(U_); }
  nlohmann::json describe() const override;

 private:
  SpectralOperator C_;
  SpectralBasis basis_;
  CoordinatePotential U_;
  std::string name_;
};

/// U(x) = c/2 |x|^2 on eigen coordinates.
CoordinatePotential quadratic_coordinate_potential(double c);

}  // namespace phmc
