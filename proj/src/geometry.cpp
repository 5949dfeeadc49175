#include "anomaly/geometry.hpp"

#include "anomaly/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace anomaly {

namespace {

constexpr double kHermitianTol = 1e-14;
// smallest admissible ratio of extreme eigenvalues
constexpr double kConditionFloor = 1e-15;

Matrix3c hermitian_part(const Matrix3c& g) { return 0.5 * (g + g.adjoint()); }

}  // namespace

HermitianMetric::HermitianMetric(const Matrix3c& g) {
  if (!g.allFinite()) throw InvalidInput("metric has non-finite entries");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const double asym = (g - g.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol * scale) {
    std::ostringstream msg;
    msg << "metric is not Hermitian: max |g - g^H| = " << asym;
    throw InvalidInput(msg.str());
  }
  g_ = hermitian_part(g);

  Eigen::SelfAdjointEigenSolver<Matrix3c> eig(g_, Eigen::EigenvaluesOnly);
  eig_ = eig.eigenvalues();
  det_ = eig_.prod();
  if (!(eig_(0) > 0.0) || !(eig_(0) > kConditionFloor * eig_(2))) {
    std::ostringstream msg;
    msg << "metric is not positive definite: eigenvalues " << eig_.transpose();
    throw DegenerateMetric(msg.str());
  }
  g_inv_ = hermitian_part(g_.inverse());
}

HermitianMetric HermitianMetric::hermitized(const Matrix3c& g) { return HermitianMetric(hermitian_part(g)); }

HermitianMetric HermitianMetric::diagonal(double l1, double l2, double l3) {
  Matrix3c g = Matrix3c::Zero();
  g(0, 0) = l1;
  g(1, 1) = l2;
  g(2, 2) = l3;
  return HermitianMetric(g);
}

FourForm22 FourForm22::antisymmetrized(const Tensor4& raw) {
  Tensor4 f;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d)
          f(a, b, c, d) = 0.25 * (raw(a, b, c, d) - raw(b, a, c, d) - raw(a, b, d, c) + raw(b, a, d, c));
  return FourForm22(f);
}

double FourForm22::antisymmetry_defect() const {
  double m = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) {
          m = std::max(m, std::abs(f_(a, b, c, d) + f_(b, a, c, d)));
          m = std::max(m, std::abs(f_(a, b, c, d) + f_(a, b, d, c)));
        }
  return m;
}

double FourForm22::reality_defect() const {
  double m = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) m = std::max(m, std::abs(f_(a, b, c, d) - std::conj(f_(c, d, a, b))));
  return m;
}

FourForm22 FourForm22::pulled_back(const BasisChange& p) const {
  // f^i = Q^i_r e^r and fbar^i = conj(Q^i_r) ebar^r with Q = P^-1; contract
  // one slot at a time.
  const Matrix3c& q = p.inverse();
  Tensor4 s1, s2, s3, s4;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d2 = 0; d2 < kDim; ++d2)
          for (int d = 0; d < kDim; ++d) s1(a, b, c, d2) += f_(a, b, c, d) * q(d, d2);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c2 = 0; c2 < kDim; ++c2)
        for (int d2 = 0; d2 < kDim; ++d2)
          for (int c = 0; c < kDim; ++c) s2(a, b, c2, d2) += s1(a, b, c, d2) * q(c, c2);
  for (int a = 0; a < kDim; ++a)
    for (int b2 = 0; b2 < kDim; ++b2)
      for (int c2 = 0; c2 < kDim; ++c2)
        for (int d2 = 0; d2 < kDim; ++d2)
          for (int b = 0; b < kDim; ++b) s3(a, b2, c2, d2) += s2(a, b, c2, d2) * std::conj(q(b, b2));
  for (int a2 = 0; a2 < kDim; ++a2)
    for (int b2 = 0; b2 < kDim; ++b2)
      for (int c2 = 0; c2 < kDim; ++c2)
        for (int d2 = 0; d2 < kDim; ++d2)
          for (int a = 0; a < kDim; ++a) s4(a2, b2, c2, d2) += s3(a, b2, c2, d2) * std::conj(q(a, a2));
  return FourForm22(s4);
}

std::pair<Matrix3c, double> inverse_and_det(const HermitianMetric& g) { return {g.inverse(), g.det()}; }

double omega_norm(const HermitianMetric& g) { return 1.0 / std::sqrt(g.det()); }

BasisChange orthonormalizing_basis(const HermitianMetric& g) {
  Eigen::LLT<Matrix3c> llt(g.matrix());
  if (llt.info() != Eigen::Success) throw DegenerateMetric("Cholesky factorization failed");
  const Matrix3c l = llt.matrixL();
  return BasisChange(l.adjoint().inverse(), 0.0);
}

Tensor3 i_del_omega(const StructureConstants& c, const HermitianMetric& g) {
  const BasisChange p = orthonormalizing_basis(g);
  const StructureConstants k = transform_structure_constants(c, p);
  const Matrix3c& q = p.inverse();
  // H_f[d][a][b] = -k^d_{ab}; pull back with one conj(Q) on the barred slot.
  Tensor3 out;
  for (int d2 = 0; d2 < kDim; ++d2)
    for (int a2 = 0; a2 < kDim; ++a2)
      for (int b2 = 0; b2 < kDim; ++b2) {
        Complex s{};
        for (int d = 0; d < kDim; ++d)
          for (int a = 0; a < kDim; ++a)
            for (int b = 0; b < kDim; ++b) s -= k(d, a, b) * std::conj(q(d, d2)) * q(a, a2) * q(b, b2);
        out(d2, a2, b2) = s;
      }
  return out;
}

FourForm22 i_del_delbar_omega(const StructureConstants& c, const HermitianMetric& g) {
  // w[i][c][d] = g_{īs} c^s_{cd}
  Tensor3 w;
  for (int i = 0; i < kDim; ++i)
    for (int cc = 0; cc < kDim; ++cc)
      for (int d = 0; d < kDim; ++d)
        for (int s = 0; s < kDim; ++s) w(i, cc, d) += g(i, s) * c(s, cc, d);
  Tensor4 raw;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int d = 0; d < kDim; ++d) {
          Complex s{};
          for (int i = 0; i < kDim; ++i) s += std::conj(c(i, a, b)) * w(i, cc, d);
          raw(a, b, cc, d) = 0.25 * s;
        }
  return FourForm22::antisymmetrized(raw);
}

Tensor5 del_omega_squared(const StructureConstants& c, const HermitianMetric& g) {
  Tensor5 raw;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int p = 0; p < kDim; ++p)
          for (int q = 0; q < kDim; ++q) {
            Complex s{};
            for (int r = 0; r < kDim; ++r) s += (g(p, r) * g(q, cc) - g(p, cc) * g(q, r)) * c(r, a, b);
            raw(a, b, cc, p, q) = 0.5 * s;
          }

  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}}};
  static constexpr std::array<double, 6> kSigns{1, 1, 1, -1, -1, -1};
  Tensor5 out;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int p = 0; p < kDim; ++p)
          for (int q = 0; q < kDim; ++q) {
            const std::array<int, 3> idx{a, b, cc};
            Complex s{};
            for (std::size_t n = 0; n < kPerms.size(); ++n) {
              const int x = idx[kPerms[n][0]], y = idx[kPerms[n][1]], z = idx[kPerms[n][2]];
              s += kSigns[n] * (raw(x, y, z, p, q) - raw(x, y, z, q, p));
            }
            out(a, b, cc, p, q) = s / 12.0;
          }
  return out;
}

FourForm22 conformal_omega_squared(const HermitianMetric& g) {
  const double norm = omega_norm(g);
  Tensor4 raw;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) raw(a, b, c, d) = 0.5 * norm * (g(a, c) * g(b, d) - g(a, d) * g(b, c));
  return FourForm22::antisymmetrized(raw);
}

}  // namespace anomaly
