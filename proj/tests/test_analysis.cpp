#include "doctest.h"

#include "anomaly/analysis.hpp"
#include "anomaly/error.hpp"
#include "test_support.hpp"

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

using namespace anomaly;

namespace {

HermitianMetric solvable_stationary_example(double beta) {
  Matrix3c m = Matrix3c::Ones();
  m(0, 1) = m(1, 0) = 0.0;
  m(2, 2) = 2.0 + beta;
  return HermitianMetric(m);
}

HermitianMetric perturbed(const HermitianMetric& g, std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(-size, size);
  Vector9d y = to_coordinates(g.matrix());
  for (int i = 0; i < 9; ++i) y(i) += u(rng);
  return HermitianMetric(from_coordinates(y));
}

// lambda' = lambda^{3/2} (1 - 2 beta / lambda), integrated with odeint
double isotropic_reference(double lambda0, double beta, double t) {
  std::array<double, 1> x{lambda0};
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 1>>>(1e-14, 1e-14),
                          [beta](const std::array<double, 1>& s, std::array<double, 1>& ds, double) {
                            ds[0] = std::pow(s[0], 1.5) * (1.0 - 2.0 * beta / s[0]);
                          },
                          x, 0.0, t, 1e-4);
  return x[0];
}

}  // namespace

TEST_CASE("eigenvalues of small matrices") {
  auto close = [](const std::vector<Complex>& got, std::vector<double> want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  };
  close(eigenvalues(Eigen::MatrixXd::Identity(3, 3)), {1, 1, 1});
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  close(eigenvalues(d), {1, 2, 3});
  Eigen::MatrixXd q(3, 3);
  q << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  close(eigenvalues(0.5 * q), {-0.5, -0.5, 1.0});
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -1, 1, 0;
  const auto r = eigenvalues(rot);
  CHECK(std::abs(r[0] - Complex(0, -1)) <= 1e-14);
  CHECK(std::abs(r[1] - Complex(0, 1)) <= 1e-14);
  CHECK_THROWS_AS(eigenvalues(Eigen::MatrixXd::Zero(2, 3)), InvalidInput);
}

TEST_CASE("stability classification") {
  CHECK(classify_stability({Complex(-1), Complex(-0.5)}) == Stability::AsymptoticallyStable);
  CHECK(classify_stability({Complex(-1), Complex(1e-9)}) == Stability::Marginal);
  CHECK(classify_stability({Complex(-1), Complex(1e-3)}) == Stability::Unstable);
}

TEST_CASE("jacobian") {
  std::mt19937_64 rng(79);
  const auto g = testing::random_metric(rng);
  CHECK(jacobian(g, catalog(GroupKind::Abelian), ConnectionParams(1, 1)).cwiseAbs().maxCoeff() == 0.0);

  // beta = 1/2: the diagonal block at the identity is Q = sqrt(beta/2) [[0,1,1],[1,0,1],[1,1,0]]
  const ConnectionParams params(1.0, 1.0);
  const Matrix9d jac = jacobian(HermitianMetric::identity(), catalog(GroupKind::SL2C), params);
  Eigen::Matrix3d q;
  q << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  q *= std::sqrt(0.25);
  CHECK((jac.topLeftCorner<3, 3>() - q).cwiseAbs().maxCoeff() <= 1e-5);

  // a probe step that leaves the cone is shrunk
  const HermitianMetric thin = HermitianMetric::diagonal(1.0, 1.0, 1e-7);
  CHECK_NOTHROW(jacobian(thin, catalog(GroupKind::SL2C), params, 1e-6));
  CHECK_THROWS_AS(jacobian(thin, catalog(GroupKind::SL2C), params, 1e-2), DegenerateMetric);
}

TEST_CASE("linearization at the sl2c stationary point") {
  const ConnectionParams params(1.0, 1.0);
  const auto spectrum = linearize(HermitianMetric::identity(), catalog(GroupKind::SL2C), params);
  CHECK(spectrum.stability == Stability::Unstable);
  CHECK(spectrum.max_real_part == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(spectrum.eigenvalues.front().real() == doctest::Approx(-0.5).epsilon(1e-6));

  const auto ab = linearize(HermitianMetric::identity(), catalog(GroupKind::Abelian), params);
  CHECK(ab.stability == Stability::Marginal);

  const auto sol = linearize(solvable_stationary_example(1.0), catalog(GroupKind::Solvable), ConnectionParams(1.0, 2.0));
  CHECK(sol.stability == Stability::Unstable);
  CHECK(sol.rhs_norm <= 1e-14);
}

TEST_CASE("newton finds the sl2c stationary point") {
  std::mt19937_64 rng(83);
  for (double beta : {0.5, 1.0}) {
    const ConnectionParams params(1.0, 2.0 * beta);
    const auto r = find_stationary(catalog(GroupKind::SL2C), params, HermitianMetric(1.8 * beta * Matrix3c::Identity()));
    REQUIRE(r.converged);
    CHECK(r.classification == StationaryClass::SL2CUnique);
    CHECK((r.metric.matrix() - 2.0 * beta * Matrix3c::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(r.rhs_norm <= 1e-10);
    CHECK(r.warnings.empty());
  }
  const ConnectionParams params(1.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    // generic Hermitian guesses land on the automorphism orbit of 2 beta I
    const auto guess = perturbed(HermitianMetric(2.0 * Matrix3c::Identity()), rng, 0.15);
    const auto r = find_stationary(catalog(GroupKind::SL2C), params, guess);
    REQUIRE(r.converged);
    CHECK(r.classification == StationaryClass::SL2CUnique);
    CHECK(on_sl2c_stationary_orbit(r.metric, 1.0, 1e-8));
    CHECK(std::abs(r.metric.det() - 8.0) <= 1e-8);
  }
  for (int i = 0; i < 20; ++i) {
    // real symmetric guesses stay real and reach 2 beta I itself
    Vector9d y = to_coordinates(2.0 * Matrix3c::Identity());
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int k : {0, 1, 2, 3, 5, 7}) y(k) += u(rng);
    const auto r = find_stationary(catalog(GroupKind::SL2C), params, HermitianMetric(from_coordinates(y)));
    REQUIRE(r.converged);
    CHECK((r.metric.matrix() - 2.0 * Matrix3c::Identity()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("the sl2c stationary orbit") {
  Eigen::Matrix3d a;
  a << 0, 0.3, -0.2, -0.3, 0, 0.1, 0.2, -0.1, 0;
  const Matrix3c m = (Complex(0, 2) * a.cast<Complex>()).exp();
  const double beta = 0.7;
  const HermitianMetric g(2.0 * beta * m);
  CHECK(on_sl2c_stationary_orbit(g, beta, 1e-12));
  CHECK(rhs(g, catalog(GroupKind::SL2C), ConnectionParams(1.0, 4.0 * beta / 2.0)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK_FALSE(on_sl2c_stationary_orbit(HermitianMetric::diagonal(1.4, 1.4, 1.5), beta, 1e-6));
}

TEST_CASE("newton on the solvable family") {
  std::mt19937_64 rng(89);
  const ConnectionParams params(1.0, 2.0);
  for (int i = 0; i < 5; ++i) {
    const auto guess = perturbed(solvable_stationary_example(1.0), rng, 0.05);
    const auto r = find_stationary(catalog(GroupKind::Solvable), params, guess);
    REQUIRE(r.converged);
    CHECK(r.classification == StationaryClass::SolvableFamily);
    CHECK(classify_solvable_stationary(r.metric, 1.0, 1e-8));
  }
}

TEST_CASE("newton reports no nilpotent stationary point") {
  const auto r = find_stationary(catalog(GroupKind::Nilpotent), ConnectionParams(1.0, 1.0), HermitianMetric::identity());
  CHECK_FALSE(r.converged);
  CHECK(r.classification == StationaryClass::None);
  CHECK(r.rhs_norm > 1e-10);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("newton warns for non-positive beta") {
  const auto r = find_stationary(catalog(GroupKind::SL2C), ConnectionParams(0.5, 1.0), HermitianMetric::identity());
  CHECK_FALSE(r.warnings.empty());
  CHECK_FALSE(r.converged);
  const auto ab = find_stationary(catalog(GroupKind::Abelian), ConnectionParams(0.0, 1.0), HermitianMetric::identity());
  CHECK(ab.converged);
  CHECK(ab.classification == StationaryClass::AbelianAny);
  CHECK(ab.iterations == 0);
}

TEST_CASE("solvable stationary classification") {
  CHECK(classify_solvable_stationary(solvable_stationary_example(1.0), 1.0, 1e-10));
  CHECK(classify_solvable_stationary(HermitianMetric::identity(), 1.0, 1e-10));
  CHECK_FALSE(classify_solvable_stationary(HermitianMetric::identity(), 2.0, 1e-10));
  Matrix3c m = solvable_stationary_example(1.0).matrix();
  m(0, 1) = 0.1;
  m(1, 0) = 0.1;
  CHECK_FALSE(classify_solvable_stationary(HermitianMetric(m), 1.0, 1e-10));
}

TEST_CASE("nilpotent diagonal oracle") {
  const std::array<double, 3> l0{2.0, 1.0, 1.0};
  CHECK(nilpotent_diagonal_oracle(l0, 0.0) == l0);
  const auto l1 = nilpotent_diagonal_oracle(l0, 1.0);
  CHECK(l1[0] == doctest::Approx(2.7071067811865475).epsilon(1e-14));
  CHECK(l1[1] == doctest::Approx(1.3535533905932737).epsilon(1e-14));
  CHECK(l1[2] == 1.0);
  const auto eq = nilpotent_diagonal_oracle({1.0, 1.0, 1.0}, 3.0);
  CHECK(eq[0] == eq[1]);
  // slope lambda3^{3/2} sqrt(lambda1/lambda2) / 2
  const auto s = nilpotent_diagonal_oracle({3.0, 2.0, 4.0}, 1.0);
  CHECK(s[0] - 3.0 == doctest::Approx(8.0 * std::sqrt(1.5) / 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(nilpotent_diagonal_oracle(l0, -10.0), DomainError);
}

TEST_CASE("solvable oracle") {
  Matrix3c m = Matrix3c::Identity();
  m(0, 0) = 1.3;
  m(1, 1) = 0.8;
  m(0, 2) = Complex(0.2, -0.1);
  m(1, 2) = Complex(0.05, 0.15);
  m(2, 0) = std::conj(m(0, 2));
  m(2, 1) = std::conj(m(1, 2));
  const HermitianMetric g0(m);
  CHECK((solvable_reduced_oracle(g0, 1.0, 0.0).matrix() - m).cwiseAbs().maxCoeff() <= 1e-14);

  const auto fixed = solvable_stationary_example(1.0);
  CHECK((solvable_reduced_oracle(fixed, 1.0, 3.0).matrix() - fixed.matrix()).cwiseAbs().maxCoeff() <= 1e-13);

  const double a = 0.8 / 1.3, d = 1.3 * 1.3 * g0.inverse()(2, 2).real();
  const auto back = solvable_reduced_oracle(g0, 1.0, -5.0);
  CHECK(std::abs(back.inverse()(2, 2).real() - 1.0) <= std::exp(-std::sqrt(a * d) * 5.0));

  Matrix3c off = m;
  off(0, 1) = 0.1;
  off(1, 0) = 0.1;
  CHECK_THROWS_AS(solvable_reduced_oracle(HermitianMetric(off), 1.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(solvable_reduced_oracle(g0, 5.0, 3.0), DomainError);
}

TEST_CASE("sl2c isotropic oracle") {
  CHECK(sl2c_isotropic_constant(4.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(blow_up_time(4.0, 0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(sl2c_isotropic_oracle(4.0, 0.5, 0.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::abs(sl2c_isotropic_oracle(4.0, 0.5, 0.5) - 11.835241761409925) <= 1e-8);
  CHECK(sl2c_isotropic_oracle(1.0, 0.5, 7.0) == 1.0);
  CHECK(sl2c_isotropic_oracle(4.0, 0.5, 0.999 * std::log(3.0)) > 1e5);
  CHECK_THROWS_AS(sl2c_isotropic_oracle(4.0, 0.5, std::log(3.0)), DomainError);
  CHECK_THROWS_AS(blow_up_time(1.0, 0.5), DomainError);
  for (double l0 : {0.25, 0.6, 1.7, 4.0})
    for (double frac : {0.2, 0.5, 0.8}) {
      const double t = frac * blow_up_time(l0, 0.5);
      CHECK(std::abs(sl2c_isotropic_oracle(l0, 0.5, t) - isotropic_reference(l0, 0.5, t)) <=
            1e-9 * std::max(1.0, isotropic_reference(l0, 0.5, t)));
    }
}

TEST_CASE("sl2c diagonal system") {
  const auto zero = sl2c_diagonal_rhs({1.4, 1.4, 1.4}, 0.7);
  for (double v : zero) CHECK(std::abs(v) <= 1e-15);
  const auto unit = sl2c_diagonal_rhs({1.0, 1.0, 1.0}, 1.0);
  for (double v : unit) CHECK(v == -1.0);
  const auto pair = sl2c_diagonal_rhs({2.0, 2.0, 0.5}, 0.8);
  CHECK(pair[0] == pair[1]);

  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  for (int i = 0; i < 50; ++i) {
    const std::array<double, 3> l{u(rng), u(rng), u(rng)};
    const double beta = 0.2 + 0.05 * i;
    const Matrix3c r = rhs(HermitianMetric::diagonal(l[0], l[1], l[2]), catalog(GroupKind::SL2C),
                           ConnectionParams(1.0, 2.0 * beta));
    const auto red = sl2c_diagonal_rhs(l, beta);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(r(k, k) - red[k]) <= 1e-12);
    CHECK((r - Matrix3c(r.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14);
  }
}
