#pragma once

// Finite spectral truncation of the Hilbert-space scale H^s: diagonal operators in a
// shared eigenbasis, vectors in grid or eigen coordinates, the H^s inner products,
// Gaussian sampling, and the low/high mode split.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmc/rng.hpp"

namespace phmc {

/// How the coefficients of a SpectralVector are to be read.
///  - grid:  values on the discretization grid; <x,y> = weight * sum x_j y_j.
///  - eigen: coordinates in the eigenbasis, orthonormal for the weighted product;
///           <x,y> = sum x_j y_j.
enum class Representation { grid, eigen };

std::string to_string(Representation r);
Representation representation_from_string(const std::string& s);

/// A positive symmetric operator given by its eigenvalues (non-increasing) in the
/// shared eigenbasis.
class SpectralOperator {
 public:
  SpectralOperator() = default;
  explicit SpectralOperator(std::vector<double> eigenvalues, std::string label = {});

  std::size_t dimension() const noexcept { return eigenvalues_.size(); }
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  double operator[](std::size_t i) const { return eigenvalues_[i]; }
  const std::string& label() const noexcept { return label_; }

  double trace() const;

  /// Operator with eigenvalues lambda_j^p.
  SpectralOperator power(double p) const;

 private:
  std::vector<double> eigenvalues_;
  std::string label_;
};

class SpectralVector {
 public:
  SpectralVector() = default;
  SpectralVector(std::vector<double> coefficients, double weight, Representation rep);

  static SpectralVector eigen(std::vector<double> coefficients, double weight = 1.0) {
    return {std::move(coefficients), weight, Representation::eigen};
  }
  static SpectralVector grid(std::vector<double> coefficients, double weight) {
    return {std::move(coefficients), weight, Representation::grid};
  }
  static SpectralVector zeros(std::size_t n, double weight, Representation rep) {
    return {std::vector<double>(n, 0.0), weight, rep};
  }

  std::size_t size() const noexcept { return coefficients_.size(); }
  double weight() const noexcept { return weight_; }
  Representation representation() const noexcept { return rep_; }

  std::span<const double> coefficients() const noexcept { return coefficients_; }
  std::span<double> coefficients() noexcept { return coefficients_; }
  std::vector<double>& data() noexcept { return coefficients_; }
  const std::vector<double>& data() const noexcept { return coefficients_; }

  double operator[](std::size_t i) const { return coefficients_[i]; }
  double& operator[](std::size_t i) { return coefficients_[i]; }

  bool operator==(const SpectralVector&) const = default;

 private:
  std::vector<double> coefficients_;
  double weight_ = 1.0;
  Representation rep_ = Representation::eigen;
};

/// Inner product of the ambient discretized space; honours the representation flag.
double inner(const SpectralVector& x, const SpectralVector& y);

SpectralVector operator-(const SpectralVector& x, const SpectralVector& y);
SpectralVector operator+(const SpectralVector& x, const SpectralVector& y);

/// Number of low modes; valid when 1 <= n <= N for the vector it is applied to.
struct ModeSplit {
  std::size_t n = 1;
};

/// Sobolev index s of H^s; s < 1.
class SobolevIndex {
 public:
  explicit SobolevIndex(double s = 0.0);
  double value() const noexcept { return s_; }

 private:
  double s_;
};

/// <x, y>_s = sum lambda_j^{-s} x_j y_j; x and y in eigen coordinates of C.
double hs_inner(const SpectralVector& x, const SpectralVector& y, const SpectralOperator& C,
                SobolevIndex s);
double hs_norm(const SpectralVector& x, const SpectralOperator& C, SobolevIndex s);
double hs_norm_squared(const SpectralVector& x, const SpectralOperator& C, SobolevIndex s);

/// xi_j = sqrt(lambda_j) * rho_j with rho_j iid N(0,1) drawn from rng in index order.
SpectralVector sample_gaussian(const SpectralOperator& C, RngStream& rng);
void sample_gaussian(const SpectralOperator& C, RngStream& rng, std::span<double> out);

/// trace(Ctilde C^{-s}) over the truncation.
double weighted_trace(const SpectralOperator& Ctilde, const SpectralOperator& C, SobolevIndex s);

/// Orthogonal projections onto modes [0, n) and [n, N).
std::pair<SpectralVector, SpectralVector> split(const SpectralVector& x, ModeSplit split);

/// Orthonormal eigenbasis of a block-structured grid operator: a (points x points)
/// dot-orthonormal matrix acting identically on each of `block` interleaved coordinates.
/// Grid index of (point j, coordinate i) is j*block + i. Mode e maps to
/// (column column_of_mode[e], coordinate coord_of_mode[e]).
class SpectralBasis {
 public:
  SpectralBasis() = default;

  static SpectralBasis identity(std::size_t n);

  SpectralBasis(std::size_t points, std::size_t block, double weight,
                std::vector<double> columns, std::vector<std::size_t> column_of_mode,
                std::vector<std::size_t> coord_of_mode);

  std::size_t dimension() const noexcept { return points_ * block_; }
  std::size_t points() const noexcept { return points_; }
  std::size_t block() const noexcept { return block_; }
  double weight() const noexcept { return weight_; }
  bool is_identity() const noexcept { return identity_; }

  /// Entry j of basis column c (dot-normalized).
  double column_entry(std::size_t c, std::size_t j) const { return columns_[c * points_ + j]; }

  void to_eigen(std::span<const double> grid, std::span<double> eigen) const;
  void to_grid(std::span<const double> eigen, std::span<double> grid) const;

  /// Converts if needed; a vector already in the target representation is returned as is.
  SpectralVector to_eigen(const SpectralVector& x) const;
  SpectralVector to_grid(const SpectralVector& x) const;

 private:
  std::size_t points_ = 0;
  std::size_t block_ = 1;
  double weight_ = 1.0;
  bool identity_ = false;
  std::vector<double> columns_;
  std::vector<std::size_t> column_of_mode_;
  std::vector<std::size_t> coord_of_mode_;
};

// Serialization. With hex_floats every double is written as a C99 hexadecimal
// string ("0x1.8p+1"), which round-trips bit-exactly through any JSON tool chain.
nlohmann::json to_json(const SpectralOperator& op, bool hex_floats = false);
nlohmann::json to_json(const SpectralVector& v, bool hex_floats = false);
SpectralOperator operator_from_json(const nlohmann::json& j);
SpectralVector vector_from_json(const nlohmann::json& j);

nlohmann::json encode_double(double x, bool hex);
double decode_double(const nlohmann::json& j);

}  // namespace phmc
