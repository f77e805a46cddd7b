#include "phmc/model.hpp"

#include "phmc/error.hpp"

namespace phmc {

void Model::apply_covariance(std::span<const double> g, std::span<double> out) const {
  const std::size_t n = dimension();
  if (g.size() != n) throw DimensionError("apply_covariance", n, g.size());
  std::vector<double> e(n);
  basis().to_eigen(g, e);
  const auto& C = covariance();
  for (std::size_t i = 0; i < n; ++i) e[i] *= C[i];
  basis().to_grid(e, out);
}

double Model::precision_quadratic(std::span<const double> x) const {
  const std::size_t n = dimension();
  std::vector<double> e(n);
  basis().to_eigen(x, e);
  const auto& C = covariance();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += e[i] * e[i] / C[i];
  return acc;
}

double Model::force(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = dimension();
  if (out.size() != n) throw DimensionError("force", n, out.size());
  if (!has_potential()) {
    std::fill(out.begin(), out.end(), 0.0);
    return 0.0;
  }
  std::vector<double> grad(n);
  const double U = potential(x, grad);
  const double inv_w = 1.0 / weight();
  for (double& g : grad) g *= inv_w;
  apply_covariance(grad, out);
  return U;
}

double Model::energy(std::span<const double> q, std::span<const double> v, double U) const {
  return 0.5 * precision_quadratic(v) + U + 0.5 * precision_quadratic(q);
}

DiagonalModel::DiagonalModel(SpectralOperator C, CoordinatePotential U, std::string name)
    : C_(std::move(C)),
      basis_(SpectralBasis::identity(C_.dimension())),
      U_(std::move(U)),
      name_(std::move(name)) {}

void DiagonalModel::apply_covariance(std::span<const double> g, std::span<double> out) const {
  if (g.size() != C_.dimension()) throw DimensionError("apply_covariance", C_.dimension(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = C_[i] * g[i];
}

double DiagonalModel::precision_quadratic(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * x[i] / C_[i];
  return acc;
}

double DiagonalModel::potential(std::span<const double> x, std::span<double> grad) const {
  if (!U_) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return 0.0;
  }
  return U_(x, grad);
}

nlohmann::json DiagonalModel::describe() const {
  return {{"model", "diagonal"}, {"name", name_}, {"dimension", C_.dimension()},
          {"has_potential", has_potential()}};
}

CoordinatePotential quadratic_coordinate_potential(double c) {
  return [c](std::span<const double> x, std::span<double> grad) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += x[i] * x[i];
      if (!grad.empty()) grad[i] = c * x[i];
    }
    return 0.5 * c * acc;
  };
}

}  // namespace phmc
