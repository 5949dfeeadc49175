#include "doctest.h"

#include "anomaly/error.hpp"
#include "anomaly/flow.hpp"
#include "test_support.hpp"

#include <boost/numeric/odeint.hpp>

using namespace anomaly;

namespace {

double max_entry(const Matrix3c& m) { return m.cwiseAbs().maxCoeff(); }

// g_{1̄2} = 0, g_{3̄3} = 2 + beta, other entries 1
HermitianMetric solvable_stationary_example(double beta) {
  Matrix3c m = Matrix3c::Ones();
  m(0, 1) = m(1, 0) = 0.0;
  m(2, 2) = 2.0 + beta;
  return HermitianMetric(m);
}

// Independent integration of the same vector field with odeint's Dormand-Prince stepper.
Matrix3c odeint_flow(const HermitianMetric& g0, const StructureConstants& c, const ConnectionParams& params,
                     double t1) {
  using State = std::array<double, 9>;
  State y;
  const Vector9d y0 = to_coordinates(g0.matrix());
  for (int i = 0; i < 9; ++i) y[i] = y0(i);
  auto field = [&](const State& x, State& dx, double) {
    Vector9d v;
    for (int i = 0; i < 9; ++i) v(i) = x[i];
    const Vector9d d = to_coordinates(rhs(HermitianMetric(from_coordinates(v)), c, params));
    for (int i = 0; i < 9; ++i) dx[i] = d(i);
  };
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), field, y, 0.0, t1,
                          1e-3);
  Vector9d out;
  for (int i = 0; i < 9; ++i) out(i) = y[i];
  return from_coordinates(out);
}

}  // namespace

TEST_CASE("real coordinates round-trip") {
  std::mt19937_64 rng(43);
  const auto g = testing::random_metric(rng);
  const Vector9d y = to_coordinates(g.matrix());
  CHECK(max_entry(from_coordinates(y) - g.matrix()) <= 1e-15);
  CHECK(y(3) == g(0, 1).real());
  CHECK(y(4) == g(0, 1).imag());
  CHECK(y(8) == g(1, 2).imag());
}

TEST_CASE("rhs special values") {
  std::mt19937_64 rng(47);
  const ConnectionParams bismut = ConnectionParams::bismut(2.0);  // beta = 1
  for (int i = 0; i < 10; ++i)
    CHECK(max_entry(rhs(testing::random_metric(rng), catalog(GroupKind::Abelian), bismut)) == 0.0);

  for (double kappa : {0.0, 0.5, 1.0, 2.0}) {
    const Matrix3c r = rhs(HermitianMetric::identity(), catalog(GroupKind::Nilpotent), ConnectionParams(kappa, 1.3));
    Matrix3c expected = Matrix3c::Zero();
    expected(0, 0) = 0.5;
    expected(1, 1) = 0.5;
    CHECK(max_entry(r - expected) <= 1e-15);
  }

  for (double beta : {0.5, 1.0, 2.0}) {
    const ConnectionParams params(1.0, 2.0 * beta);
    CHECK(max_entry(rhs(solvable_stationary_example(beta), catalog(GroupKind::Solvable), params)) <= 1e-14);
  }
  const HermitianMetric iso(2.0 * Matrix3c::Identity());
  CHECK(max_entry(rhs(iso, catalog(GroupKind::SL2C), bismut)) <= 1e-14);
}

TEST_CASE("rhs is Hermitian and equals the contraction of the anomaly form") {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 100; ++i) {
    const auto g = testing::random_metric(rng);
    for (auto kind : testing::all_kinds()) {
      const ConnectionParams params(1.0, 1.7);
      const Matrix3c r = rhs(g, catalog(kind), params);
      CHECK(max_entry(r - r.adjoint()) <= 1e-12);
      if (i < 20) CHECK(max_entry(r - velocity_from_form(anomaly_form(catalog(kind), g, params), g)) <= 1e-12);
    }
  }
}

TEST_CASE("nilpotent reduction") {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 20; ++i) {
    const auto g = testing::random_metric(rng);
    const Matrix3c& G = g.inverse();
    const double k = 1.0 / (2.0 * omega_norm(g));
    const Matrix3c r = rhs(g, catalog(GroupKind::Nilpotent), ConnectionParams(1.0, 0.9));
    CHECK(std::abs(r(0, 0) - k * G(1, 1) * g(2, 2)) <= 1e-12);
    CHECK(std::abs(r(0, 1) + k * G(0, 1) * g(2, 2)) <= 1e-12);
    CHECK(std::abs(r(1, 1) - k * G(0, 0) * g(2, 2)) <= 1e-12);
    for (int p = 0; p < 3; ++p) CHECK(std::abs(r(p, 2)) <= 1e-12);
  }
}

TEST_CASE("solvable reduction") {
  std::mt19937_64 rng(61);
  const double beta = 0.8;
  const ConnectionParams params(1.0, 4.0 * beta / 2.0);
  REQUIRE(params.beta() == doctest::Approx(beta));
  for (int i = 0; i < 20; ++i) {
    const auto g = testing::random_metric(rng);
    const Matrix3c& G = g.inverse();
    const Complex k = 1.0 / (2.0 * omega_norm(g));
    const Complex g33 = G(2, 2);
    const Matrix3c r = rhs(g, catalog(GroupKind::Solvable), params);
    CHECK(std::abs(r(0, 0) - k * (g33 * g(0, 0) - beta * g33 * g33 * g(0, 0))) <= 1e-12);
    CHECK(std::abs(r(1, 1) - k * (g33 * g(1, 1) - beta * g33 * g33 * g(1, 1))) <= 1e-12);
    CHECK(std::abs(r(1, 2) - k * (G(0, 2) * g(1, 0) - G(1, 2) * g(1, 1) + beta * G(0, 2) * g33 * g(1, 0) +
                                  beta * G(1, 2) * g33 * g(1, 1))) <= 1e-12);
    CHECK(std::abs(r(2, 2) - k * (G(0, 0) * g(0, 0) + G(1, 1) * g(1, 1) - G(1, 0) * g(0, 1) - G(0, 1) * g(1, 0) -
                                  beta * G(0, 0) * g33 * g(0, 0) - beta * G(1, 1) * g33 * g(1, 1) -
                                  beta * G(1, 0) * g33 * g(0, 1) - beta * G(0, 1) * g33 * g(1, 0))) <= 1e-12);
    // the (1,2) and (1,3) entries by direct substitution of the bracket table
    CHECK(std::abs(r(0, 1) + k * g33 * g(0, 1) * (1.0 + beta * g33)) <= 1e-12);
    CHECK(std::abs(r(0, 2) - k * (-G(0, 2) * g(0, 0) + G(1, 2) * g(0, 1) + beta * G(0, 2) * g33 * g(0, 0) +
                                  beta * G(1, 2) * g33 * g(0, 1))) <= 1e-12);
  }
}

TEST_CASE("flow form consistency") {
  CHECK(flow_form_consistency(HermitianMetric::identity(), catalog(GroupKind::Abelian), ConnectionParams(1, 1)) == 0.0);
  CHECK(flow_form_consistency(HermitianMetric::identity(), catalog(GroupKind::Nilpotent), ConnectionParams(1, 1)) <=
        1e-8);
  std::mt19937_64 rng(67);
  for (int i = 0; i < 10; ++i) {
    const auto g = testing::random_metric(rng);
    for (auto kind : testing::all_kinds())
      for (double kappa : {0.0, 0.5, 1.0, -1.0})
        CHECK(flow_form_consistency(g, catalog(kind), ConnectionParams(kappa, 0.7)) <= 1e-7);
  }
}

TEST_CASE("integrator configuration validation") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = IntegratorConfig{};
  cfg.rel_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = IntegratorConfig{};
  cfg.t_max = 0.0;
  CHECK_THROWS_AS(integrate(FlowState{}, catalog(GroupKind::Abelian), ConnectionParams(1, 1), cfg), InvalidConfig);
}

TEST_CASE("abelian trajectories are constant") {
  std::mt19937_64 rng(71);
  const auto g = testing::random_metric(rng);
  for (auto scheme : {Scheme::RK4Fixed, Scheme::RKF45Adaptive}) {
    IntegratorConfig cfg;
    cfg.scheme = scheme;
    cfg.dt = 0.1;
    cfg.t_max = 5.0;
    const auto traj = integrate(FlowState{0.0, g}, catalog(GroupKind::Abelian), ConnectionParams(1, 1), cfg);
    CHECK(traj.termination == Termination::ReachedHorizon);
    CHECK(traj.final_sample().state.t == 5.0);
    for (const auto& s : traj.samples) CHECK(max_entry(s.state.g.matrix() - g.matrix()) == 0.0);
  }
}

TEST_CASE("nilpotent diagonal flow against a reference value") {
  IntegratorConfig cfg;
  cfg.t_max = 1.0;
  const ConnectionParams params(1.0, 1.0);
  const auto traj = integrate(FlowState{0.0, HermitianMetric::diagonal(2, 1, 1)}, catalog(GroupKind::Nilpotent), params, cfg);
  REQUIRE(traj.termination == Termination::ReachedHorizon);
  const auto& g = traj.final_sample().state.g;
  CHECK(std::abs(g(0, 0) - 2.7071067811865475) <= 1e-9);
  CHECK(std::abs(g(1, 1) - 1.3535533905932737) <= 1e-9);
  CHECK(std::abs(g(2, 2) - 1.0) <= 1e-12);
  const auto& m = traj.final_sample().monitors;
  CHECK(*m.get("drift_lambda3") <= 1e-12);
  CHECK(*m.get("drift_ratio") <= 1e-10);
  CHECK(*m.get("offdiag_max") == 0.0);

  cfg.scheme = Scheme::RK4Fixed;
  cfg.dt = 1e-3;
  const auto fixed = integrate(FlowState{0.0, HermitianMetric::diagonal(2, 1, 1)}, catalog(GroupKind::Nilpotent), params, cfg);
  CHECK(fixed.samples.size() == 1001);
  CHECK(std::abs(fixed.final_sample().state.g(0, 0) - 2.7071067811865475) <= 1e-10);
}

TEST_CASE("adaptive integration agrees with an independent integrator") {
  std::mt19937_64 rng(73);
  IntegratorConfig cfg;
  cfg.t_max = 0.3;
  for (int i = 0; i < 3; ++i) {
    const auto g = testing::random_metric(rng, 0.8, 1.5);
    for (auto kind : testing::all_kinds()) {
      const ConnectionParams params(1.0, 1.0);
      const auto traj = integrate(FlowState{0.0, g}, catalog(kind), params, cfg);
      REQUIRE(traj.termination == Termination::ReachedHorizon);
      const Matrix3c ref = odeint_flow(g, catalog(kind), params, 0.3);
      CHECK(max_entry(traj.final_sample().state.g.matrix() - ref) <= 1e-8);
    }
  }
}

TEST_CASE("sample times are strictly monotone in both directions") {
  IntegratorConfig cfg;
  cfg.t_max = 1.0;
  for (auto dir : {Direction::Forward, Direction::Backward}) {
    cfg.direction = dir;
    const auto traj = integrate(FlowState{2.0, solvable_stationary_example(1.0)}, catalog(GroupKind::Solvable),
                                ConnectionParams(1.0, 1.0), cfg);
    const double sign = dir == Direction::Forward ? 1.0 : -1.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
      CHECK(sign * (traj.samples[i].state.t - traj.samples[i - 1].state.t) > 0.0);
    CHECK(traj.final_sample().state.t == doctest::Approx(2.0 + sign));
  }
}

TEST_CASE("sl2c isotropic blow-up and collapse") {
  const ConnectionParams params(1.0, 1.0);  // beta = 1/2
  const double blow_up_time = std::log(3.0);
  IntegratorConfig cfg;
  cfg.t_max = 3.0;
  auto traj = integrate(FlowState{0.0, HermitianMetric::diagonal(4, 4, 4)}, catalog(GroupKind::SL2C), params, cfg);
  CHECK(traj.termination == Termination::BlowUp);
  CHECK(std::abs(traj.final_sample().state.t - blow_up_time) <= 0.01 * blow_up_time);

  cfg.t_max = 0.5;
  traj = integrate(FlowState{0.0, HermitianMetric::diagonal(4, 4, 4)}, catalog(GroupKind::SL2C), params, cfg);
  CHECK(std::abs(traj.final_sample().state.g(0, 0) - 11.835241761409925) <= 1e-8);
  CHECK(*traj.final_sample().monitors.get("eq12") == 1.0);

  cfg.t_max = 3.0;
  traj = integrate(FlowState{0.0, HermitianMetric::diagonal(0.25, 0.25, 0.25)}, catalog(GroupKind::SL2C), params, cfg);
  CHECK(traj.termination == Termination::Degenerate);
  CHECK(std::abs(traj.final_sample().state.t - blow_up_time) <= 0.01 * blow_up_time);
}

TEST_CASE("solvable backward flow reaches the stationary set") {
  Matrix3c m = Matrix3c::Identity();
  m(0, 2) = Complex(0.2, 0.1);
  m(2, 0) = std::conj(m(0, 2));
  m(1, 2) = Complex(-0.1, 0.3);
  m(2, 1) = std::conj(m(1, 2));
  m(0, 0) = 1.5;
  IntegratorConfig cfg;
  cfg.direction = Direction::Backward;
  cfg.t_max = 200.0;
  const auto traj = integrate(FlowState{0.0, HermitianMetric(m)}, catalog(GroupKind::Solvable), ConnectionParams(1.0, 2.0), cfg);
  CHECK(traj.termination == Termination::Stationary);
  const auto& rec = traj.final_sample().monitors;
  CHECK(std::abs(*rec.get("g_inv33") - 1.0) <= 1e-6);
  CHECK(*rec.get("abs_g12") <= 1e-12);
  for (const char* name : {"drift_a", "drift_b", "drift_c", "drift_d"}) CHECK(*rec.get(name) <= 1e-6);
}

TEST_CASE("a run that starts stationary reaches the horizon") {
  IntegratorConfig cfg;
  cfg.t_max = 2.0;
  const auto traj = integrate(FlowState{0.0, solvable_stationary_example(1.0)}, catalog(GroupKind::Solvable),
                              ConnectionParams(1.0, 2.0), cfg);
  CHECK(traj.termination == Termination::ReachedHorizon);
}

TEST_CASE("monitor record contents") {
  const ConnectionParams params(1.0, 1.0);
  const FlowState s{0.0, HermitianMetric::diagonal(3, 2, 1)};
  const auto sl = monitors(s, GroupKind::SL2C, s, params);
  CHECK(*sl.get("eig_max") == doctest::Approx(3.0));
  CHECK(*sl.get("eig_min") == doctest::Approx(1.0));
  CHECK(*sl.get("eq12") == 0.0);
  CHECK(sl.det_g == doctest::Approx(6.0));
  CHECK(sl.rhs_norm > 0.0);
  const auto nil = monitors(s, GroupKind::Nilpotent, s, params);
  CHECK(*nil.get("lambda1_over_lambda2") == doctest::Approx(1.5));
  const auto sol = monitors(s, GroupKind::Solvable, s, params);
  CHECK(*sol.get("a") == doctest::Approx(2.0 / 3.0));
  CHECK(*sol.get("d") == doctest::Approx(9.0));
  CHECK(sol.all_finite());
  CHECK_FALSE(sol.get("lambda3").has_value());
}
