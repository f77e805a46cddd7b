#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "phmc/error.hpp"
#include "phmc/models.hpp"
#include "phmc/sampler.hpp"

using namespace phmc;

namespace {

ModelPtr free_model() {
  return std::make_shared<DiagonalModel>(SpectralOperator({1.0, 0.25, 0.04}));
}

ModelPtr quadratic_model(double c) {
  return std::make_shared<DiagonalModel>(SpectralOperator({1.0, 0.25, 0.04}), quadratic_coordinate_potential(c));
}

}  // namespace

TEST_CASE("one quarter turn without potential returns the velocity") {
  const auto model = free_model();
  const auto k = PhmcKernel::exact(model, std::numbers::pi / 2, 0.1);
  const auto x = SpectralVector::eigen({3.0, -2.0, 1.0});
  RngStream a(42), b(42);
  const auto next = phmc_step(x, k, a);
  const auto xi = sample_gaussian(model->covariance(), b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(next[i] == doctest::Approx(xi[i]).scale(1.0).epsilon(1e-14));
  CHECK(a.uniform() == b.uniform());
}

TEST_CASE("exact step without potential is Gaussian") {
  const auto model = free_model();
  const double T = 0.7;
  const auto k = PhmcKernel::exact(model, T, 0.1);
  const auto x = SpectralVector::eigen({1.0, 1.0, 1.0});
  RngStream rng(1);
  const std::size_t n = 40000;
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto y = phmc_step(x, k, rng);
    for (std::size_t i = 0; i < 3; ++i) {
      sum[i] += y[i];
      sq[i] += y[i] * y[i];
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double mean = sum[i] / n;
    const double var = sq[i] / n - mean * mean;
    const double expect_var = std::sin(T) * std::sin(T) * model->covariance()[i];
    CHECK(std::abs(mean - std::cos(T)) <= 4.0 * std::sqrt(expect_var / n));
    CHECK(std::abs(var - expect_var) <= 4.0 * expect_var * std::sqrt(2.0 / n));
  }
}

TEST_CASE("randomized kernel: geometric step counts and exact acceptance") {
  const auto model = free_model();
  const auto k = PhmcKernel::randomized(model, 1.0, 0.1);
  CHECK(k.duration.mean_steps == doctest::Approx(10.0));
  RngStream rng(7);
  const auto st = run_chain(SpectralVector::eigen({0, 0, 0}), k, 20000, rng);
  CHECK(st.acceptance_rate == 1.0);
  const double sd = std::sqrt(0.9) / 0.1;
  CHECK(std::abs(st.mean_k - 10.0) <= 4.0 * sd / std::sqrt(20000.0));
}

TEST_CASE("draw order per transition") {
  const auto model = quadratic_model(1.0);
  auto k = PhmcKernel::randomized(model, 1.0, 0.1);
  TransitionEngine e1(k), e2(k);
  ChainState s1 = e1.make_state(std::vector<double>{0.5, 0.1, -0.2});
  ChainState s2 = s1;
  RngStream r1(99), r2(99);
  const auto i1 = e1.step(s1, r1);
  std::vector<double> xi(3);
  for (std::size_t j = 0; j < 3; ++j) xi[j] = std::sqrt(model->covariance()[j]) * r2.normal();
  const auto steps = r2.geometric(0.1);
  const double u = r2.uniform();
  const auto i2 = e2.transition(s2, xi, steps, u);
  CHECK(i1.steps == i2.steps);
  CHECK(i1.accepted == i2.accepted);
  CHECK(s1.q == s2.q);
  CHECK(r1.uniform() == r2.uniform());
}

TEST_CASE("Metropolis chain targets the Gaussian posterior") {
  const double c = 3.0;
  const auto model = quadratic_model(c);
  const auto k = PhmcKernel::randomized(model, 1.0, 0.25);
  RngStream rng(3);
  const auto st = run_chain(SpectralVector::eigen({0, 0, 0}), k, 40000, rng);
  CHECK(st.acceptance_rate > 0.5);
  CHECK(st.acceptance_rate < 1.0);
  for (std::size_t j = 0; j < 3; ++j) {
    const double lam = model->covariance()[j];
    const double target = lam / (1.0 + c * lam);
    CHECK(st.variance[j] == doctest::Approx(target).epsilon(0.05));
    CHECK(std::abs(st.mean[j]) <= 0.05 * std::sqrt(target) * 3);
  }
}

TEST_CASE("chains are reproducible") {
  const auto model = build_model({{"model", "tps"}, {"tau", 1.0}, {"m", 8}, {"potential", "quadratic"}});
  const auto k = PhmcKernel::randomized(model, 0.5, 0.1);
  const auto x0 = SpectralVector::zeros(8, model->weight(), Representation::grid);
  RngStream a(5), b(5);
  const auto s1 = run_chain(x0, k, 200, a);
  const auto s2 = run_chain(x0, k, 200, b);
  CHECK(s1.final_state == s2.final_state);
  CHECK(s1.accepted == s2.accepted);
  CHECK(s1.final_state.representation() == Representation::grid);
}

TEST_CASE("rejected proposals leave the state unchanged") {
  const auto model = build_model(
      {{"model", "tps"}, {"tau", 1.0}, {"m", 8}, {"potential", {{"name", "quadratic"}, {"params", {{"curvature", 200.0}}}}}});
  const auto k = PhmcKernel::randomized(model, 1.0, 0.5);
  TransitionEngine e(k);
  ChainState s = e.make_state(std::vector<double>(8, 0.3));
  std::vector<double> xi(8, 0.0);
  const ChainState before = s;
  const auto info = e.transition(s, xi, 2, 1.0);
  REQUIRE(info.accept_prob < 1.0);
  CHECK_FALSE(info.accepted);
  CHECK(s.q == before.q);
  CHECK(s.U == before.U);
}

TEST_CASE("invalid kernels are rejected") {
  const auto model = free_model();
  PhmcKernel k = PhmcKernel::exact(model, -1.0, 0.1);
  CHECK_THROWS_AS(k.validate(), ConfigError);
  k = PhmcKernel::exact(model, 1.0, 0.1);
  k.velocity_covariance = SpectralOperator({1.0, 1.0});
  CHECK_THROWS_AS(k.validate(), DimensionError);
  k = PhmcKernel::randomized(model, 1.0, 0.1);
  k.velocity_covariance = SpectralOperator({2.0, 1.0, 1.0});
  CHECK_THROWS_AS(k.validate(), ConfigError);
  RngStream rng(1);
  CHECK_THROWS_AS(phmc_step(SpectralVector::eigen({0, 0, 0}), PhmcKernel::randomized(model, 1.0, 0.1), rng),
                  ConfigError);
  CHECK_THROWS_AS(run_chain(SpectralVector::eigen({0, 0}), PhmcKernel::exact(model, 1.0, 0.1), 1, rng),
                  DimensionError);
  CHECK(duration_kind_from_string("geometric") == DurationRule::Kind::geometric_steps);
  CHECK_THROWS_AS(duration_kind_from_string("poisson"), ConfigError);
}

TEST_CASE("chain sink receives every step") {
  struct Counter : ChainSink {
    std::size_t n = 0;
    void record(const ChainRecord& r) override {
      ++n;
      CHECK(r.step == n);
      CHECK(r.coordinates.size() == 3);
    }
  } sink;
  RngStream rng(2);
  run_chain(SpectralVector::eigen({0, 0, 0}), PhmcKernel::randomized(quadratic_model(1.0), 1.0, 0.2), 50, rng, &sink);
  CHECK(sink.n == 50);
}
