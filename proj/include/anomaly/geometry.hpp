#pragma once

// Left-invariant Hermitian metrics omega = i g_{b̄a} e^a ∧ ē^b and the forms
// built from them. Matrix entry (a, b) holds g_{āb}.

#include "anomaly/algebra.hpp"
#include "anomaly/tensor.hpp"

#include <utility>

namespace anomaly {

class HermitianMetric {
 public:
  /// Validates Hermiticity to 1e-14 (scaled by max(1, max |g|)) and positive
  /// definiteness; throws InvalidInput / DegenerateMetric.
  explicit HermitianMetric(const Matrix3c& g);

  /// Replaces g by (g + g^H) / 2 before validating.
  static HermitianMetric hermitized(const Matrix3c& g);
  static HermitianMetric identity() { return HermitianMetric(Matrix3c::Identity()); }
  static HermitianMetric diagonal(double l1, double l2, double l3);

  const Matrix3c& matrix() const { return g_; }
  /// g_{āb}
  Complex operator()(int a, int b) const { return g_(a, b); }
  /// inverse()(a, b) = g^{ab̄}, so that g^{ab̄} g_{b̄c} = delta^a_c.
  const Matrix3c& inverse() const { return g_inv_; }
  double det() const { return det_; }
  /// Ascending eigenvalues.
  const Eigen::Vector3d& eigenvalues() const { return eig_; }

 private:
  Matrix3c g_;
  Matrix3c g_inv_;
  double det_ = 1.0;
  Eigen::Vector3d eig_;
};

/// Coefficients of a (2,2)-form sum F[a][b][c][d] e^d ∧ e^c ∧ ē^b ∧ ē^a.
/// Antisymmetry in (a,b) and in (c,d) is imposed on construction.
class FourForm22 {
 public:
  FourForm22() = default;
  static FourForm22 antisymmetrized(const Tensor4& raw);

  const Complex& operator()(int a, int b, int c, int d) const { return f_(a, b, c, d); }
  const Tensor4& array() const { return f_; }
  double max_abs() const { return f_.max_abs(); }

  double antisymmetry_defect() const;
  /// max |F[a][b][c][d] - conj(F[c][d][a][b])|; zero for a real form.
  double reality_defect() const;

  /// Given coefficients in the frame f^i = (P^-1)^i_r e^r, returns the
  /// coefficients of the same form in the frame e^r.
  FourForm22 pulled_back(const BasisChange& p) const;

  friend FourForm22 operator+(const FourForm22& x, const FourForm22& y) { return FourForm22(x.f_ + y.f_); }
  friend FourForm22 operator-(const FourForm22& x, const FourForm22& y) { return FourForm22(x.f_ - y.f_); }
  friend FourForm22 operator*(double s, const FourForm22& x) { return FourForm22(s * x.f_); }
  friend double max_abs_diff(const FourForm22& x, const FourForm22& y) { return max_abs_diff(x.f_, y.f_); }

 private:
  explicit FourForm22(const Tensor4& f) : f_(f) {}
  Tensor4 f_;
};

/// (g^{ab̄}, det g)
std::pair<Matrix3c, double> inverse_and_det(const HermitianMetric& g);

/// ||Omega||_omega = (det g)^(-1/2)
double omega_norm(const HermitianMetric& g);

/// P with conj(P)^T g P = I, P = (L^H)^-1 for the Cholesky factor g = L L^H.
BasisChange orthonormalizing_basis(const HermitianMetric& g);

/// H = i d omega = (1/2) sum H[d][a][b] e^b ∧ e^a ∧ ē^d; H[d][a][b] = -c^d_{ab}
/// in an orthonormal frame. General metrics go through orthonormalizing_basis.
Tensor3 i_del_omega(const StructureConstants& c, const HermitianMetric& g);

/// i d dbar omega = (1/4) g_{īs} conj(c^i_{ab}) c^s_{cd} e^d∧e^c∧ē^b∧ē^a
FourForm22 i_del_delbar_omega(const StructureConstants& c, const HermitianMetric& g);

/// Coefficients D[a][b][c][p][q] of d omega^2 on e^a∧e^b∧e^c∧ē^p∧ē^q,
/// antisymmetrized over (a,b,c) and (p,q). Vanishes iff omega is balanced.
Tensor5 del_omega_squared(const StructureConstants& c, const HermitianMetric& g);

/// ||Omega||_omega omega^2 in FourForm22 layout:
/// (det g)^(-1/2) (g_{āc} g_{b̄d} - g_{ād} g_{b̄c}) / 2.
FourForm22 conformal_omega_squared(const HermitianMetric& g);

}  // namespace anomaly
