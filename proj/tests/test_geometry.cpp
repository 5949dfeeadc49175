#include "doctest.h"

#include "anomaly/error.hpp"
#include "anomaly/geometry.hpp"
#include "test_support.hpp"

using namespace anomaly;

namespace {

// i d dbar omega in an orthonormal frame: (1/4) sum_l conj(c^l_{ab}) c^l_{cd}
Tensor4 orthonormal_iddbar(const StructureConstants& c) {
  Tensor4 f;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int cc = 0; cc < 3; ++cc)
        for (int d = 0; d < 3; ++d)
          for (int l = 0; l < 3; ++l) f(a, b, cc, d) += 0.25 * std::conj(c(l, a, b)) * c(l, cc, d);
  return f;
}

// Direct general-metric torsion: H[d][a][b] = -g_{d̄s} c^s_{ab}
Tensor3 direct_torsion(const StructureConstants& c, const HermitianMetric& g) {
  Tensor3 h;
  for (int d = 0; d < 3; ++d)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int s = 0; s < 3; ++s) h(d, a, b) -= g(d, s) * c(s, a, b);
  return h;
}

}  // namespace

TEST_CASE("metric validation") {
  Matrix3c g = Matrix3c::Identity();
  g(0, 1) = Complex(0.1, 0.2);
  CHECK_THROWS_AS(HermitianMetric{g}, InvalidInput);
  g(1, 0) = std::conj(g(0, 1));
  CHECK_NOTHROW(HermitianMetric{g});

  Matrix3c indefinite = Matrix3c::Identity();
  indefinite(2, 2) = -1.0;
  CHECK_THROWS_AS(HermitianMetric{indefinite}, DegenerateMetric);
  Matrix3c nan = Matrix3c::Identity();
  nan(1, 1) = std::nan("");
  CHECK_THROWS_AS(HermitianMetric{nan}, InvalidInput);
}

TEST_CASE("inverse and determinant") {
  auto [inv, det] = inverse_and_det(HermitianMetric::identity());
  CHECK((inv - Matrix3c::Identity()).norm() == 0.0);
  CHECK(det == doctest::Approx(1.0));

  auto [dinv, ddet] = inverse_and_det(HermitianMetric::diagonal(2.0, 4.0, 0.5));
  CHECK(dinv(0, 0).real() == doctest::Approx(0.5));
  CHECK(dinv(1, 1).real() == doctest::Approx(0.25));
  CHECK(dinv(2, 2).real() == doctest::Approx(2.0));
  CHECK(ddet == doctest::Approx(4.0));

  // g_{1̄2} = 0 block: g^{33̄} = g_{1̄1} g_{2̄2} / det g
  Matrix3c m;
  m << 2.0, 0.0, Complex(0.3, 0.1), 0.0, 1.5, Complex(-0.2, 0.4), Complex(0.3, -0.1), Complex(-0.2, -0.4), 3.0;
  const HermitianMetric g(m);
  CHECK(std::abs(g.inverse()(2, 2) - 2.0 * 1.5 / g.det()) <= 1e-14);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto r = testing::random_metric(rng);
    CHECK((r.inverse() * r.matrix() - Matrix3c::Identity()).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(std::abs(r.matrix().determinant() - r.det()) <= 1e-12);
  }
}

TEST_CASE("omega norm") {
  CHECK(omega_norm(HermitianMetric::identity()) == 1.0);
  CHECK(omega_norm(HermitianMetric::diagonal(2.0, 3.0, 5.0)) == doctest::Approx(1.0 / std::sqrt(30.0)));
  const double beta = 0.7;
  const HermitianMetric iso(2.0 * beta * Matrix3c::Identity());
  CHECK(omega_norm(iso) == doctest::Approx(std::pow(2.0 * beta, -1.5)));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto g = testing::random_metric(rng);
    const double s = 0.3 + i * 0.2;
    const HermitianMetric sg(s * g.matrix());
    CHECK(omega_norm(sg) == doctest::Approx(std::pow(s, -1.5) * omega_norm(g)).epsilon(1e-13));
  }
}

TEST_CASE("orthonormalizing basis") {
  const auto id = orthonormalizing_basis(HermitianMetric::identity());
  CHECK((id.matrix() - Matrix3c::Identity()).norm() <= 1e-15);
  const auto diag = orthonormalizing_basis(HermitianMetric::diagonal(4.0, 9.0, 0.25));
  CHECK(std::abs(diag.matrix()(0, 0) - 0.5) <= 1e-15);
  CHECK(std::abs(diag.matrix()(1, 1) - 1.0 / 3.0) <= 1e-15);
  CHECK(std::abs(diag.matrix()(2, 2) - 2.0) <= 1e-15);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto g = testing::random_metric(rng);
    const auto p = orthonormalizing_basis(g);
    const Matrix3c rel = p.matrix().conjugate().transpose() * g.matrix() * p.matrix();
    CHECK((rel - Matrix3c::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix3c rebuilt = p.inverse().conjugate().transpose() * p.inverse();
    CHECK((rebuilt - g.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("torsion form") {
  const auto h = i_del_omega(catalog(GroupKind::Nilpotent), HermitianMetric::identity());
  CHECK(std::abs(h(2, 0, 1) + 1.0) <= 1e-15);
  CHECK(std::abs(h(2, 1, 0) - 1.0) <= 1e-15);
  CHECK(h.max_abs() == doctest::Approx(1.0));

  const auto hs = i_del_omega(catalog(GroupKind::Solvable), HermitianMetric::identity());
  CHECK(std::abs(hs(0, 2, 0) + 1.0) <= 1e-15);
  CHECK(std::abs(hs(0, 0, 2) - 1.0) <= 1e-15);
  CHECK(std::abs(hs(1, 2, 1) - 1.0) <= 1e-15);
  CHECK(std::abs(hs(1, 1, 2) + 1.0) <= 1e-15);

  std::mt19937_64 rng(13);
  for (int i = 0; i < 30; ++i) {
    const auto g = testing::random_metric(rng);
    CHECK(i_del_omega(catalog(GroupKind::Abelian), g).max_abs() == 0.0);
    for (auto kind : testing::all_kinds()) {
      const auto c = catalog(kind);
      CHECK(max_abs_diff(i_del_omega(c, g), direct_torsion(c, g)) <= 1e-12);
    }
  }
}

TEST_CASE("i d dbar omega") {
  const auto id = HermitianMetric::identity();
  const auto nil = i_del_delbar_omega(catalog(GroupKind::Nilpotent), id);
  CHECK(std::abs(nil(0, 1, 0, 1) - 0.25) <= 1e-15);
  CHECK(std::abs(nil(1, 0, 0, 1) + 0.25) <= 1e-15);

  for (auto kind : testing::all_kinds()) {
    const auto c = catalog(kind);
    CHECK(max_abs_diff(i_del_delbar_omega(c, id).array(), orthonormal_iddbar(c)) <= 1e-15);
  }

  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const auto g = testing::random_metric(rng);
    CHECK(i_del_delbar_omega(catalog(GroupKind::Abelian), g).max_abs() == 0.0);
    for (auto kind : testing::all_kinds()) {
      const auto c = catalog(kind);
      const auto f = i_del_delbar_omega(c, g);
      CHECK(f.antisymmetry_defect() <= 1e-12);
      CHECK(f.reality_defect() <= 1e-12);
      // orthonormal frame evaluation pulled back through P
      const auto p = orthonormalizing_basis(g);
      const auto k = transform_structure_constants(c, p);
      const auto framed = i_del_delbar_omega(k, id).pulled_back(p);
      CHECK(max_abs_diff(framed, f) <= 1e-10);
    }
  }
}

TEST_CASE("d omega squared and the balanced condition") {
  Tensor3 t;
  t(0, 0, 1) = 1.0;
  t(0, 1, 0) = -1.0;
  const StructureConstants non_uni(t);
  const auto id = HermitianMetric::identity();
  const auto d = del_omega_squared(non_uni, id);
  CHECK(std::abs(d(0, 1, 2, 0, 2) - 1.0 / 6.0) <= 1e-15);
  CHECK(std::abs(d(0, 1, 2, 2, 0) + 1.0 / 6.0) <= 1e-15);
  CHECK(d.max_abs() == doctest::Approx(1.0 / 6.0));

  std::mt19937_64 rng(19);
  for (int i = 0; i < 100; ++i) {
    const auto g = testing::random_metric(rng);
    for (auto kind : testing::all_kinds()) CHECK(del_omega_squared(catalog(kind), g).max_abs() <= 1e-12);
    CHECK(del_omega_squared(non_uni, g).max_abs() > 1e-3);
  }
}

TEST_CASE("conformal omega squared") {
  const auto f = conformal_omega_squared(HermitianMetric::diagonal(1.0, 4.0, 1.0));
  CHECK(std::abs(f(0, 1, 0, 1) - 0.5 * 4.0 * 0.5) <= 1e-15);
  CHECK(std::abs(f(0, 1, 1, 0) + 1.0) <= 1e-15);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const auto w = conformal_omega_squared(testing::random_metric(rng));
    CHECK(w.antisymmetry_defect() <= 1e-14);
    CHECK(w.reality_defect() <= 1e-14);
  }
}
