#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "phmc/coupling.hpp"
#include "phmc/error.hpp"
#include "phmc/models.hpp"

using namespace phmc;

namespace {

const SpectralOperator kC({1.0, 0.5, 0.25, 0.1});

ModelPtr diag(bool potential) {
  return std::make_shared<DiagonalModel>(kC, potential ? quadratic_coordinate_potential(1.5) : CoordinatePotential{});
}

CouplingKernel exact_coupling(ModelPtr model, double T, GammaSpec g, std::size_t n) {
  CouplingKernel k;
  k.base = PhmcKernel::exact(std::move(model), T, 0.05);
  k.gamma = g;
  k.split = ModeSplit{n};
  k.meet_threshold = 0.0;
  return k;
}

}  // namespace

TEST_CASE("gamma rules") {
  CHECK(resolve_gamma(GammaSpec::parse("zero"), 0.3) == 0.0);
  CHECK(resolve_gamma(GammaSpec::parse("1/T"), 0.25) == doctest::Approx(4.0));
  CHECK(resolve_gamma(GammaSpec::parse("cot-T"), 0.5) == doctest::Approx(1.0 / std::tan(0.5)));
  CHECK(resolve_gamma(GammaSpec::parse("cot-T"), 2.0) == 0.0);
  CHECK(resolve_gamma(GammaSpec::parse("0.7"), 1.0) == doctest::Approx(0.7));
  GammaSpec th = GammaSpec::parse("theorem");
  th.R = 50.596;
  CHECK(resolve_gamma(th, 0.01) == doctest::Approx(1.0 / (4 * 50.596)));
  CHECK(resolve_gamma(th, 1000.0) == doctest::Approx(0.001));
  CHECK_THROWS_AS(GammaSpec::parse("bogus"), ConfigError);
  CHECK_THROWS_AS(GammaSpec::parse("-1"), ConfigError);
  CHECK_THROWS_AS(resolve_gamma(GammaSpec::parse("theorem"), 1.0), ConfigError);
  CHECK(GammaSpec::parse("one-over-T").name() == "one-over-T");
}

TEST_CASE("reflection identities") {
  RngStream rng(1);
  const auto z = SpectralVector::eigen({0.3, -0.2, 0.1});
  const auto rz = reflection_apply(z, z, kC);
  for (std::size_t j = 0; j < 3; ++j) CHECK(rz[j] == doctest::Approx(-z[j]));
  for (int t = 0; t < 100; ++t) {
    auto xi = SpectralVector::eigen({rng.normal(), rng.normal(), rng.normal()});
    const auto r = reflection_apply(xi, z, kC);
    const auto rr = reflection_apply(r, z, kC);
    double n0 = 0.0, n1 = 0.0, d0 = 0.0, d1 = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(rr[j] == doctest::Approx(xi[j]).epsilon(1e-12).scale(1.0));
      n0 += xi[j] * xi[j] / kC[j];
      n1 += r[j] * r[j] / kC[j];
      d0 += xi[j] * z[j] / kC[j];
      d1 += r[j] * z[j] / kC[j];
    }
    CHECK(n1 == doctest::Approx(n0).epsilon(1e-12));
    CHECK(d1 == doctest::Approx(-d0).epsilon(1e-12).scale(1.0));
  }
  const auto orth = SpectralVector::eigen({0.2, 0.6, 0.0});
  const auto ro = reflection_apply(orth, SpectralVector::eigen({0.6, -0.1, 0.0}), kC);
  for (std::size_t j = 0; j < 3; ++j) CHECK(ro[j] == doctest::Approx(orth[j]).scale(1.0));
  CHECK_THROWS_AS(reflection_apply(z, SpectralVector::eigen({0, 0, 0}), kC), ConfigError);
}

TEST_CASE("maximal coupling density") {
  const SpectralOperator one({1.0});
  CHECK(max_coupling_density(SpectralVector::eigen({1.0}), SpectralVector::eigen({0.5}), one) == doctest::Approx(1.0));
  CHECK(max_coupling_density(SpectralVector::eigen({1.0}), SpectralVector::eigen({0.0}), one) ==
        doctest::Approx(std::exp(-0.5)));
  // The shift density integrates to one against N(0, C).
  RngStream rng(2);
  const auto h = SpectralVector::eigen({0.4, -0.3});
  const SpectralOperator C2({1.0, 0.5});
  double acc = 0.0;
  const std::size_t n = 200000;
  for (std::size_t i = 0; i < n; ++i) acc += max_coupling_density(h, sample_gaussian(C2, rng), C2);
  CHECK(acc / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("failure law") {
  RngStream rng(3);
  const auto r = coupling_failure_probability(SpectralVector::eigen({1.0}), 1.0, SpectralOperator({1.0}), 200000, rng);
  CHECK(r.h == doctest::Approx(1.0));
  CHECK(r.tv_exact == doctest::Approx(0.3829).epsilon(1e-3));
  CHECK(r.bound == doctest::Approx(0.3989).epsilon(1e-3));
  CHECK(std::abs(r.empirical - r.tv_exact) <= 4 * r.se);
  CHECK(r.tv_exact <= r.bound);
  const auto r2 = coupling_failure_probability(SpectralVector::eigen({0.2, 0.1}), 2.0, kC, 100000, rng);
  CHECK(std::abs(r2.empirical - r2.tv_exact) <= 4 * r2.se);
  CHECK_THROWS_AS(coupling_failure_probability(SpectralVector::eigen({1.0}), 1.0, SpectralOperator({1.0}), 10, rng),
                  ConfigError);
}

TEST_CASE("equal states stay equal") {
  const auto k = exact_coupling(diag(true), 0.8, GammaSpec::parse("1/T"), 2);
  RngStream rng(4);
  const auto x = SpectralVector::eigen({0.1, 0.2, 0.3, 0.4});
  CoupledPair p{x, x, false};
  for (int i = 0; i < 10; ++i) {
    p = coupled_step(p, k, rng);
    CHECK(p.X == p.Y);
  }
}

TEST_CASE("zero low difference or zero gamma gives a synchronous coupling") {
  for (const char* g : {"zero", "1/T"}) {
    const auto k = exact_coupling(diag(false), 0.6, GammaSpec::parse(g), 2);
    RngStream rng(5);
    const auto x = SpectralVector::eigen({0.1, 0.2, 0.3, 0.4});
    auto y = x;
    if (std::string(g) == "zero") {
      y[0] += 0.5;
    } else {
      y[3] += 0.5;
    }
    CoupledInfo info;
    const auto p = coupled_step({x, y, false}, k, rng, &info);
    CHECK(info.shift_event);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(p.X[j] - p.Y[j] == doctest::Approx(std::cos(0.6) * (x[j] - y[j])).scale(1.0));
  }
}

TEST_CASE("contracting gamma rules close the low block exactly after a shift") {
  for (auto [rule, linear] : {std::pair{"cot-T", LinearPart::harmonic}, std::pair{"1/T", LinearPart::free}}) {
    for (double T : {0.1, 0.5, 1.0}) {
      auto k = exact_coupling(diag(false), T, GammaSpec::parse(rule), 2);
      k.base.linear = linear;
      const auto x = SpectralVector::eigen({0.001, -0.002, 0.3, 0.4});
      const auto y = SpectralVector::eigen({0.0, 0.0, 0.1, -0.2});
      CoupledInfo info;
      CoupledPair p;
      for (std::uint64_t seed = 0; seed < 20 && !info.shift_event; ++seed) {
        RngStream rng(seed);
        p = coupled_step({x, y, false}, k, rng, &info);
      }
      REQUIRE(info.shift_event);
      CHECK(std::abs(p.X[0] - p.Y[0]) <= 1e-12);
      CHECK(std::abs(p.X[1] - p.Y[1]) <= 1e-12);
      const double hf = linear == LinearPart::harmonic ? std::cos(T) : 1.0;
      CHECK(p.X[2] - p.Y[2] == doctest::Approx(hf * 0.2));
    }
  }
}

TEST_CASE("draw order per coupled transition") {
  CouplingKernel k;
  k.base = PhmcKernel::randomized(diag(true), 1.0, 0.1);
  k.gamma = GammaSpec::parse("1/T");
  k.split = ModeSplit{2};
  k.shared_uniform = false;
  CoupledEngine eng(k);
  ChainState x = eng.chain().make_state(std::vector<double>{0.1, 0.2, 0.3, 0.4});
  ChainState y = eng.chain().make_state(std::vector<double>{0.0, 0.0, 0.0, 0.0});
  bool met = false;
  RngStream a(7), b(7);
  eng.step(x, y, met, a);
  for (int i = 0; i < 4; ++i) b.normal();
  b.uniform();
  b.geometric(0.1);
  b.uniform();
  b.uniform();
  CHECK(a.uniform() == b.uniform());
}

TEST_CASE("coalesced chains move together") {
  CouplingKernel k;
  k.base = PhmcKernel::randomized(diag(true), 1.0, 0.1);
  k.gamma = GammaSpec::parse("1/T");
  k.split = ModeSplit{4};
  k.meet_threshold = 1e-8;
  CoupledEngine eng(k);
  ChainState x = eng.chain().make_state(std::vector<double>{0.1, 0.2, 0.3, 0.4});
  ChainState y = eng.chain().make_state(std::vector<double>{0.1, 0.2, 0.3, 0.4 + 1e-10});
  bool met = eng.distance(x, y) <= k.meet_threshold;
  CHECK(met);
  RngStream rng(8);
  for (int i = 0; i < 20; ++i) {
    eng.step(x, y, met, rng);
    CHECK(met);
    CHECK(x.q == y.q);
  }
}

TEST_CASE("coupled chains meet under the one-over-T rule") {
  CouplingKernel k;
  k.base = PhmcKernel::randomized(diag(true), 1.0, 0.1);
  k.gamma = GammaSpec::parse("1/T");
  k.split = ModeSplit{4};
  k.meet_threshold = 1e-8;
  CoupledEngine eng(k);
  ChainState x = eng.chain().make_state(std::vector<double>{1, 1, 1, 1});
  ChainState y = eng.chain().make_state(std::vector<double>{-1, -1, -1, -1});
  bool met = false;
  RngStream rng(9);
  std::size_t steps = 0;
  while (!met && steps < 10000) {
    eng.step(x, y, met, rng);
    ++steps;
  }
  CHECK(met);
  CHECK(x.q == y.q);
}

TEST_CASE("coupling time experiment layout and reproducibility") {
  CouplingKernel k;
  k.base = PhmcKernel::randomized(diag(true), 1.0, 0.1);
  k.split = ModeSplit{4};
  CouplingTimeConfig cfg;
  cfg.rules = {GammaSpec::parse("zero"), GammaSpec::parse("1/T")};
  cfg.T_grid = {0.5, 1.0};
  cfg.replicas = 3;
  cfg.max_steps = 500;
  cfg.seed = 11;
  const auto x0 = SpectralVector::eigen({1, 1, 1, 1});
  const auto y0 = SpectralVector::eigen({-1, -1, -1, -1});
  const auto a = coupling_time_experiment(x0, y0, k, cfg);
  CHECK(a.rows.size() == 12);
  CHECK(a.summary.size() == 4);
  cfg.threads = 2;
  const auto b = coupling_time_experiment(x0, y0, k, cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].meet_steps == b.rows[i].meet_steps);
    CHECK(a.rows[i].gamma_rule == b.rows[i].gamma_rule);
  }
  for (const auto& s : a.summary) CHECK(s.replicas == 3);
  cfg.max_steps = 2;
  cfg.rules = {GammaSpec::parse("zero")};
  const auto c = coupling_time_experiment(x0, y0, k, cfg);
  for (const auto& row : c.rows) {
    CHECK(row.censored);
    CHECK(row.meet_steps == 2);
  }
  for (const auto& s : c.summary) CHECK(s.censored == 3);
  cfg.T_grid.clear();
  CHECK_THROWS_AS(coupling_time_experiment(x0, y0, k, cfg), ConfigError);
}

TEST_CASE("mean coupled distance decays") {
  CouplingKernel k;
  k.base = PhmcKernel::exact(diag(true), 0.8, 0.05);
  k.gamma = GammaSpec::parse("1/T");
  k.split = ModeSplit{2};
  k.meet_threshold = 0.0;
  const auto series = empirical_wasserstein_decay(
      k, [](RngStream&) { return SpectralVector::eigen({1, 1, 1, 1}); },
      [](RngStream&) { return SpectralVector::eigen({-1, -1, -1, -1}); }, 10, 200, 1, 1);
  REQUIRE(series.size() == 11);
  CHECK(series[0].mean_distance == doctest::Approx(4.0));
  CHECK(series[10].mean_distance < 0.5 * series[0].mean_distance);
  CHECK(decay_slope(series) < 0.0);
}
