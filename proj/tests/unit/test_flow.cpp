#include <doctest.h>

#include <cmath>
#include <numbers>

#include "phmc/error.hpp"
#include "phmc/flow.hpp"
#include "phmc/models.hpp"

using namespace phmc;

namespace {

PhasePoint eigen_point(std::vector<double> q, std::vector<double> v) {
  return {SpectralVector::eigen(std::move(q)), SpectralVector::eigen(std::move(v))};
}

double max_abs_diff(const SpectralVector& a, const SpectralVector& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

// Exact solution of q'' = -(1 + c lambda_j) q mode by mode.
PhasePoint harmonic_exact(const PhasePoint& z, const SpectralOperator& C, double c, double t) {
  PhasePoint out = z;
  for (std::size_t j = 0; j < z.q.size(); ++j) {
    const double w = std::sqrt(1.0 + c * C[j]);
    out.q[j] = z.q[j] * std::cos(w * t) + z.v[j] / w * std::sin(w * t);
    out.v[j] = -z.q[j] * w * std::sin(w * t) + z.v[j] * std::cos(w * t);
  }
  return out;
}

}  // namespace

TEST_CASE("rotation by a quarter turn") {
  const auto z = eigen_point({1.0, -2.0, 0.5}, {0.0, 0.0, 0.0});
  const auto r = flow_rotation(z, std::numbers::pi / 2);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.q[i] == doctest::Approx(0.0).scale(1.0));
    CHECK(r.v[i] == doctest::Approx(-z.q[i]));
  }
  const auto back = flow_rotation(r, -std::numbers::pi / 2);
  CHECK(max_abs_diff(back.q, z.q) < 1e-15);
}

TEST_CASE("translation and kick closed forms") {
  const auto z = eigen_point({1.0, 2.0}, {3.0, -1.0});
  const auto tr = flow_translation(z, 0.5);
  CHECK(tr.q[0] == doctest::Approx(2.5));
  CHECK(tr.q[1] == doctest::Approx(1.5));
  CHECK(tr.v == z.v);

  for (std::size_t m = 1; m <= 8; ++m) {
    const auto model = build_model({{"model", "tps"}, {"tau", 1.0}, {"m", m}, {"potential", "quadratic"}});
    std::vector<double> q(m), v(m);
    for (std::size_t i = 0; i < m; ++i) {
      q[i] = std::sin(1.0 + static_cast<double>(i));
      v[i] = std::cos(static_cast<double>(i));
    }
    const PhasePoint ze{SpectralVector::eigen(q, model->weight()), SpectralVector::eigen(v, model->weight())};
    const auto k = flow_kick(ze, 0.3, *model);
    for (std::size_t i = 0; i < m; ++i) CHECK(k.v[i] == doctest::Approx(v[i] - 0.3 * model->covariance()[i] * q[i]));
    CHECK(k.q == ze.q);
    const auto half = flow_kick(flow_kick(ze, 0.15, *model), 0.15, *model);
    CHECK(max_abs_diff(half.v, k.v) < 1e-13);
  }
}

TEST_CASE("step counts hit the duration") {
  CHECK(step_count(1.0, 0.25) == 4);
  CHECK(step_count(1.0, 0.3) == 4);
  CHECK(step_count(0.0, 0.1) == 0);
  CHECK(step_count(0.05, 0.1) == 1);
  CHECK_THROWS_AS(step_count(-1.0, 0.1), ConfigError);
}

TEST_CASE("linear drifts are integrated exactly") {
  const auto z = eigen_point({0.3, -0.4}, {1.0, 0.2});
  const IntegratorConfig cfg{0.37, Scheme::symmetric_splitting};
  const auto h = flow_ode(z, 1.1, cfg, Drift::linear_only(LinearPart::harmonic, Representation::eigen));
  const auto r = flow_rotation(z, 1.1);
  CHECK(max_abs_diff(h.q, r.q) < 1e-14);
  CHECK(max_abs_diff(h.v, r.v) < 1e-14);
  const auto f = flow_ode(z, 1.1, cfg, Drift::linear_only(LinearPart::free, Representation::eigen));
  CHECK(max_abs_diff(f.q, flow_translation(z, 1.1).q) < 1e-14);
}

TEST_CASE("splitting step is reversible") {
  const DiagonalModel model(SpectralOperator({1.0, 0.5, 0.2}), quadratic_coordinate_potential(2.0));
  const Drift drift = Drift::from_model(model);
  const IntegratorConfig cfg{0.1, Scheme::symmetric_splitting};
  const PhasePoint z{SpectralVector::grid({0.4, -1.0, 0.3}, 1.0), SpectralVector::grid({0.1, 0.2, -0.7}, 1.0)};
  auto fwd = flow_ode(z, 1.0, cfg, drift);
  for (double& x : fwd.v.data()) x = -x;
  auto back = flow_ode(fwd, 1.0, cfg, drift);
  for (double& x : back.v.data()) x = -x;
  CHECK(max_abs_diff(back.q, z.q) < 1e-12);
  CHECK(max_abs_diff(back.v, z.v) < 1e-12);
}

TEST_CASE("splitting converges at second order") {
  const SpectralOperator C({1.0, 0.5, 0.2});
  const double c = 2.0;
  const DiagonalModel model(C, quadratic_coordinate_potential(c));
  const Drift drift = Drift::from_model(model);
  const PhasePoint z{SpectralVector::grid({0.4, -1.0, 0.3}, 1.0), SpectralVector::grid({0.1, 0.2, -0.7}, 1.0)};
  const PhasePoint ze{SpectralVector::eigen(z.q.data()), SpectralVector::eigen(z.v.data())};
  const auto exact = harmonic_exact(ze, C, c, 1.0);
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    const auto r = flow_ode(z, 1.0, {dt, Scheme::symmetric_splitting}, drift);
    err.push_back(std::max(max_abs_diff(r.q, exact.q), max_abs_diff(r.v, exact.v)));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double order = std::log2(err[i] / err[i + 1]);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
  }
}

TEST_CASE("energy drift is small at a small step") {
  const auto model = build_model({{"model", "tps"},
                                  {"tau", 2.0},
                                  {"m", 32},
                                  {"potential", {{"name", "normal_mixture"}, {"params", {{"means", {{-1.0}, {1.0}}}}}}}});
  const std::size_t n = model->dimension();
  RngStream rng(1);
  const auto xi = sample_gaussian(model->covariance(), rng);
  const auto x0 = sample_gaussian(model->covariance(), rng);
  const auto q = model->to_grid(x0);
  const auto v = model->to_grid(SpectralVector::eigen(xi.data(), model->weight()));
  SplittingIntegrator integ([&](std::span<const double> x, std::span<double> out) { return model->force(x, out); },
                            LinearPart::harmonic, model->weight(), n);
  std::vector<double> qq = q.data(), vv = v.data();
  integ.prime(qq);
  const double H0 = model->energy(qq, vv, integ.potential());
  double worst = 0.0;
  for (std::size_t s = 1; s <= 200; ++s) {
    integ.step(qq, vv, 0.005, s);
    worst = std::max(worst, std::abs(model->energy(qq, vv, integ.potential()) - H0));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("the integrator evaluates the force once per step") {
  int calls = 0;
  ForceFn F = [&calls](std::span<const double> q, std::span<double> out) {
    ++calls;
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = 0.5 * q[i];
    return 0.0;
  };
  SplittingIntegrator integ(F, LinearPart::harmonic, 1.0, 2);
  std::vector<double> q{1.0, 0.0}, v{0.0, 1.0};
  integ.prime(q);
  CHECK(calls == 1);
  integ.run(q, v, 10, 0.1, 0.05);
  CHECK(calls == 11);
}

TEST_CASE("runaway states raise DivergenceError") {
  ForceFn F = [](std::span<const double> q, std::span<double> out) {
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = -1e6 * q[i];
    return 0.0;
  };
  Drift drift;
  drift.force = F;
  drift.representation = Representation::eigen;
  const auto z = eigen_point({1.0}, {0.0});
  CHECK_THROWS_AS(flow_ode(z, 10.0, {0.5, Scheme::symmetric_splitting}, drift), DivergenceError);
  ForceFn nan = [](std::span<const double>, std::span<double> out) {
    out[0] = std::nan("");
    return 0.0;
  };
  drift.force = nan;
  CHECK_THROWS_AS(flow_ode(z, 1.0, {0.5, Scheme::symmetric_splitting}, drift), DivergenceError);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS((IntegratorConfig{0.0, Scheme::symmetric_splitting}.validate()), ConfigError);
  const PhasePoint bad{SpectralVector::eigen({1.0}), SpectralVector::eigen({1.0, 2.0})};
  CHECK_THROWS_AS(bad.check(), DimensionError);
  CHECK(scheme_from_string(to_string(Scheme::exact_linear)) == Scheme::exact_linear);
  CHECK_THROWS_AS(scheme_from_string("leapfrog?"), ConfigError);
}

TEST_CASE("observer sees every step") {
  std::vector<double> times;
  const auto z = eigen_point({1.0}, {0.0});
  Drift drift = Drift::linear_only(LinearPart::harmonic, Representation::eigen);
  drift.force = [](std::span<const double> q, std::span<double> out) {
    out[0] = 0.1 * q[0];
    return 0.0;
  };
  flow_ode(z, 1.0, {0.3, Scheme::symmetric_splitting}, drift,
           [&](std::size_t, double t, std::span<const double>, std::span<const double>) { times.push_back(t); });
  REQUIRE(times.size() == 4);
  CHECK(times.back() == doctest::Approx(1.0));
}
