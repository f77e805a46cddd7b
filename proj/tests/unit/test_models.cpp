#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "phmc/error.hpp"
#include "phmc/models.hpp"

using namespace phmc;

namespace {

// Independent dense -Laplacian with Dirichlet ends on m interior points of [0, tau].
Eigen::MatrixXd dirichlet_matrix(double tau, std::size_t m) {
  const double h = tau / static_cast<double>(m + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    A(i, i) = 2.0 / (h * h);
    if (i + 1 < m) A(i, i + 1) = A(i + 1, i) = -1.0 / (h * h);
  }
  return A;
}

// Independent dense periodic precision -Laplacian + a on m points of [0, beta).
Eigen::MatrixXd periodic_matrix(double beta, double a, std::size_t m) {
  const double h = beta / static_cast<double>(m);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    A(i, i) += 2.0 / (h * h) + a;
    A(i, (i + 1) % m) -= 1.0 / (h * h);
    A(i, (i + m - 1) % m) -= 1.0 / (h * h);
  }
  return A;
}

// Kronecker product with the d x d identity, matching the interleaved grid layout.
Eigen::MatrixXd blockify(const Eigen::MatrixXd& A, std::size_t d) {
  const auto m = static_cast<std::size_t>(A.rows());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m * d, m * d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t c = 0; c < d; ++c) B(i * d + c, j * d + c) = A(i, j);
  return B;
}

Eigen::VectorXd random_vector(std::size_t n, RngStream& rng) {
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

ModelPtr tps(double tau, std::size_t d, std::size_t m, nlohmann::json potential = "zero") {
  return build_model({{"model", "tps"}, {"tau", tau}, {"d", d}, {"m", m}, {"potential", potential}});
}

ModelPtr pimd(double beta, double a, std::size_t d, std::size_t m, nlohmann::json potential = "zero") {
  return build_model(
      {{"model", "pimd"}, {"beta", beta}, {"a", a}, {"d", d}, {"m", m}, {"potential", potential}});
}

}  // namespace

TEST_CASE("TPS eigenvalue examples") {
  const auto ev = TpsModel::discrete_eigenvalues(std::numbers::pi, 1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == doctest::Approx(std::numbers::pi * std::numbers::pi / 8.0));
  CHECK(TpsModel::continuum_eigenvalue(std::numbers::pi, 2) == doctest::Approx(0.25));
}

TEST_CASE("PIMD eigenvalue examples") {
  CHECK(PimdModel::continuum_eigenvalue(2.0 * std::numbers::pi, 1.0, 2) == doctest::Approx(0.5));
  CHECK(PimdModel::continuum_eigenvalue(2.0 * std::numbers::pi, 1.0, 1) == doctest::Approx(1.0));
  const double lam = PimdModel::discrete_eigenvalue(2.0 * std::numbers::pi, 1.0, 4096, 2);
  CHECK(lam == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("TPS covariance matches the dense Dirichlet oracle") {
  RngStream rng(1);
  for (std::size_t m : {1, 2, 3, 5, 8, 13}) {
    for (std::size_t d : {1, 2}) {
      const double tau = 0.7 + 0.3 * static_cast<double>(m);
      const auto model = tps(tau, d, m);
      const Eigen::MatrixXd A = blockify(dirichlet_matrix(tau, m), d);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
      std::vector<double> oracle(es.eigenvalues().data(), es.eigenvalues().data() + m * d);
      for (double& x : oracle) x = 1.0 / x;
      std::sort(oracle.rbegin(), oracle.rend());
      const auto& C = model->covariance();
      REQUIRE(C.dimension() == m * d);
      for (std::size_t i = 0; i < m * d; ++i) CHECK(C[i] == doctest::Approx(oracle[i]).epsilon(1e-11));

      const Eigen::VectorXd g = random_vector(m * d, rng);
      std::vector<double> out(m * d);
      model->apply_covariance(to_std(g), out);
      const Eigen::VectorXd expect = A.ldlt().solve(g);
      for (std::size_t i = 0; i < m * d; ++i) CHECK(out[i] == doctest::Approx(expect[i]).epsilon(1e-10));

      const double w = model->weight();
      CHECK(w == doctest::Approx(tau / static_cast<double>(m + 1)));
      CHECK(model->precision_quadratic(to_std(g)) == doctest::Approx(w * g.dot(A * g)).epsilon(1e-11));
    }
  }
}

TEST_CASE("PIMD covariance matches the dense periodic oracle") {
  RngStream rng(2);
  for (std::size_t m : {3, 4, 5, 8, 16}) {
    for (std::size_t d : {1, 2}) {
      const double beta = 1.3, a = 0.4;
      const auto model = pimd(beta, a, d, m);
      const Eigen::MatrixXd A = blockify(periodic_matrix(beta, a, m), d);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
      std::vector<double> oracle(es.eigenvalues().data(), es.eigenvalues().data() + m * d);
      for (double& x : oracle) x = 1.0 / x;
      std::sort(oracle.rbegin(), oracle.rend());
      const auto& C = model->covariance();
      for (std::size_t i = 0; i < m * d; ++i) CHECK(C[i] == doctest::Approx(oracle[i]).epsilon(1e-11));

      const Eigen::VectorXd g = random_vector(m * d, rng);
      std::vector<double> out(m * d);
      model->apply_covariance(to_std(g), out);
      const Eigen::VectorXd expect = A.ldlt().solve(g);
      for (std::size_t i = 0; i < m * d; ++i) CHECK(out[i] == doctest::Approx(expect[i]).epsilon(1e-10));
      CHECK(model->precision_quadratic(to_std(g)) ==
            doctest::Approx(model->weight() * g.dot(A * g)).epsilon(1e-11));
    }
  }
}

TEST_CASE("PIMD mode order starts with the zero frequency") {
  const auto model = build_model({{"model", "pimd"}, {"beta", 2.0}, {"a", 0.5}, {"d", 1}, {"m", 8}});
  const auto& pm = dynamic_cast<const PimdModel&>(*model);
  CHECK(pm.mode_frequency().front() == 0);
  CHECK(pm.covariance()[0] == doctest::Approx(1.0 / 0.5));
  CHECK(pm.mode_frequency().back() == 4);
}

TEST_CASE("grid and eigen coordinates are isometric") {
  RngStream rng(3);
  for (const auto& model : {tps(2.0, 2, 9), pimd(1.5, 0.3, 3, 7), pimd(1.5, 0.3, 1, 6)}) {
    const std::size_t n = model->dimension();
    const auto x = SpectralVector::grid(to_std(random_vector(n, rng)), model->weight());
    const auto y = SpectralVector::grid(to_std(random_vector(n, rng)), model->weight());
    const auto ex = model->to_eigen(x), ey = model->to_eigen(y);
    CHECK(ex.representation() == Representation::eigen);
    CHECK(inner(ex, ey) == doctest::Approx(inner(x, y)).epsilon(1e-12));
    const auto back = model->to_grid(ex);
    for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) q += ex[i] * ex[i] / model->covariance()[i];
    CHECK(model->precision_quadratic(x.data()) == doctest::Approx(q).epsilon(1e-11));
  }
}

TEST_CASE("quadratic G gives half the weighted squared norm") {
  RngStream rng(4);
  for (const auto& model : {tps(1.5, 2, 10, "quadratic"), pimd(1.0, 0.2, 2, 10, "quadratic")}) {
    const std::size_t n = model->dimension();
    const auto x = to_std(random_vector(n, rng));
    double sq = 0.0;
    for (double v : x) sq += v * v;
    CHECK(model->potential(x, {}) == doctest::Approx(0.5 * model->weight() * sq).epsilon(1e-12));
  }
}

TEST_CASE("TPS potential is evaluated along the mean path") {
  const auto model = build_model({{"model", "tps"},
                                  {"tau", 3.0},
                                  {"d", 1},
                                  {"m", 2},
                                  {"endpoints", {{"start", {-1.0}}, {"end", {2.0}}}},
                                  {"potential", "quadratic"}});
  const std::vector<double> x{0.0, 0.0};
  CHECK(model->potential(x, {}) == doctest::Approx(1.0 * 0.5 * (0.0 + 1.0)));
}

TEST_CASE("force is C applied to the weighted gradient") {
  RngStream rng(5);
  const nlohmann::json G = {{"name", "quadratic_cosine"}, {"params", {{"curvature", 0.5}, {"amplitude", 0.7}}}};
  for (const auto& model : {tps(2.0, 1, 7, G), pimd(1.2, 0.5, 1, 6, G)}) {
    const std::size_t n = model->dimension();
    const auto x = to_std(random_vector(n, rng));
    std::vector<double> grad(n), fd(n), F(n);
    const double U = model->potential(x, grad);
    for (std::size_t i = 0; i < n; ++i) {
      auto xp = x, xm = x;
      const double eps = 1e-6;
      xp[i] += eps;
      xm[i] -= eps;
      fd[i] = (model->potential(xp, {}) - model->potential(xm, {})) / (2 * eps);
      CHECK(grad[i] == doctest::Approx(fd[i]).epsilon(1e-6));
    }
    CHECK(model->force(x, F) == doctest::Approx(U));
    const Eigen::MatrixXd A = model->kind() == "tps" ? dirichlet_matrix(2.0, 7) : periodic_matrix(1.2, 0.5, 6);
    Eigen::VectorXd g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = fd[i] / model->weight();
    const Eigen::VectorXd expect = A.ldlt().solve(g);
    for (std::size_t i = 0; i < n; ++i) CHECK(F[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
}

TEST_CASE("energy splits into kinetic, potential and prior parts") {
  const auto model = tps(1.0, 1, 4, "quadratic");
  const std::vector<double> q{0.1, -0.2, 0.3, 0.0}, v{0.5, 0.5, -0.5, 1.0};
  const double U = model->potential(q, {});
  CHECK(model->energy(q, v, U) ==
        doctest::Approx(0.5 * model->precision_quadratic(v) + U + 0.5 * model->precision_quadratic(q)));
}

TEST_CASE("diagonal model") {
  const DiagonalModel model(SpectralOperator({2.0, 1.0, 0.5}), quadratic_coordinate_potential(3.0));
  CHECK(model.weight() == 1.0);
  const std::vector<double> x{1.0, 2.0, 0.0};
  std::vector<double> F(3);
  CHECK(model.force(x, F) == doctest::Approx(7.5));
  CHECK(F[0] == doctest::Approx(6.0));
  CHECK(F[1] == doctest::Approx(6.0));
  CHECK(model.precision_quadratic(x) == doctest::Approx(0.5 + 4.0));
}

TEST_CASE("build_model rejects bad configs") {
  CHECK_THROWS_AS(build_model({{"model", "tps"}, {"tau", 1.0}}), ConfigError);
  CHECK_THROWS_AS(build_model({{"model", "nope"}, {"m", 4}}), ConfigError);
  CHECK_THROWS_AS(build_model({{"model", "tps"}, {"tau", -1.0}, {"m", 4}}), ConfigError);
  CHECK_THROWS_AS(build_model({{"model", "pimd"}, {"beta", 1.0}, {"a", 0.0}, {"m", 4}}), ConfigError);
  CHECK_THROWS_AS(build_model({{"model", "tps"},
                               {"tau", 1.0},
                               {"d", 2},
                               {"m", 4},
                               {"endpoints", {{"start", {0.0}}, {"end", {0.0, 0.0}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(build_model({{"model", "tps"}, {"tau", 1.0}, {"m", 3}, {"potential", "unknown"}}), ConfigError);
  const auto model = tps(1.0, 1, 3);
  std::vector<double> out(2);
  CHECK_THROWS_AS(model->apply_covariance(std::vector<double>(3), out), DimensionError);
}
