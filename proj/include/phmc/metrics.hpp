#pragma once

// Distances used to state contraction: the alpha-norm, the concave profile f, the
// semimetric rho, plus small estimators for Wasserstein-type summaries.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "phmc/spectral.hpp"

namespace phmc {

/// ||x||_alpha = |C~^{-1/2} x^l| + alpha |x^h|_s, both blocks read from eigen coordinates.
struct AlphaNorm {
  double alpha = 1.0;
  ModeSplit split;
  SpectralOperator C;
  SpectralOperator Ctilde;
  SobolevIndex s{0.0};

  void validate() const;
};

double alpha_norm(const SpectralVector& x, const AlphaNorm& cfg);
/// Same, on raw eigen coordinates.
double alpha_norm(std::span<const double> x, const AlphaNorm& cfg);

/// sigma_min and sigma_max: extreme values of |C~^{-1/2} y| / |y|_s over the low modes,
/// i.e. min/max of sqrt(lambda_j^s / lambda~_j) for j < n.
std::pair<double, double> sigma_bounds(const AlphaNorm& cfg);

struct SemimetricParams {
  double a = 1.0;
  double R = 1.0;
  double eps = 0.0;

  void validate() const;
};

/// f(r) = (1 - exp(-a min(r, R))) / a.
double f_eval(double r, const SemimetricParams& p);
/// exp(-a r) for r <= R, 0 beyond.
double f_left_derivative(double r, const SemimetricParams& p);

/// sqrt(f(||x - y||_alpha) (1 + eps |x|_s^2 + eps |y|_s^2)); x, y in eigen coordinates.
double semimetric_rho(const SpectralVector& x, const SpectralVector& y, const AlphaNorm& cfg,
                      const SemimetricParams& params);
double semimetric_rho(std::span<const double> x, std::span<const double> y, const AlphaNorm& cfg,
                      const SemimetricParams& params);

struct DecayPoint {
  std::size_t step = 0;
  double mean_distance = 0.0;
  double se = 0.0;
  double log_mean = 0.0;
};

/// Least-squares slope of log_mean against step over points with positive mean.
double decay_slope(const std::vector<DecayPoint>& series);

/// W1 distance between two equal-size one-dimensional empirical measures.
double sorted_w1(std::vector<double> a, std::vector<double> b);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical value of the two-sample KS test at level alpha (0.01 or 0.05).
double ks_critical_value(std::size_t n1, std::size_t n2, double alpha);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace phmc
