#include "anomaly/curvature.hpp"

#include <atomic>
#include <cmath>

namespace anomaly {

namespace {

std::atomic<TauMutation> g_tau_mutation{TauMutation::None};

// tr(X Y) = X^p_s Y^s_p for blocks stored as [k][j][p][q]
Complex block_trace(const Tensor4& x, int i, int j, const Tensor4& y, int k, int l) {
  Complex s{};
  for (int p = 0; p < kDim; ++p)
    for (int q = 0; q < kDim; ++q) s += x(i, j, p, q) * y(k, l, q, p);
  return s;
}

// Tr(X ∧ X) for a single-type 2-form block: 2 (X_ij X_kl - X_ik X_jl + X_il X_jk)
Tensor4 pure_type_square(const Tensor4& x) {
  Tensor4 out;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l)
          out(i, j, k, l) = 2.0 * (block_trace(x, i, j, x, k, l) - block_trace(x, i, k, x, j, l) +
                                   block_trace(x, i, l, x, j, k));
  return out;
}

}  // namespace

void set_tau_mutation(TauMutation m) { g_tau_mutation.store(m); }
TauMutation tau_mutation() { return g_tau_mutation.load(); }

double ConnectionParams::tau() const {
  switch (g_tau_mutation.load(std::memory_order_relaxed)) {
    case TauMutation::Negated:
      return -2.0 * kappa_ * kappa_ * (2.0 * kappa_ - 1.0);
    case TauMutation::InnerSignFlipped:
      return 2.0 * kappa_ * kappa_ * (2.0 * kappa_ + 1.0);
    case TauMutation::None:
      break;
  }
  return 2.0 * kappa_ * kappa_ * (2.0 * kappa_ - 1.0);
}

ConnectionCoefficients connection_coefficients(const StructureConstants& c, double kappa) {
  ConnectionCoefficients out;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int d = 0; d < kDim; ++d) {
        out.holomorphic(a, b, d) = kappa * c(a, b, d);
        out.antiholomorphic(a, b, d) = -kappa * std::conj(c(d, b, a));
      }
  return out;
}

double CurvatureTensor::symmetry_defect() const {
  double m = 0.0;
  for (int k = 0; k < kDim; ++k)
    for (int j = 0; j < kDim; ++j)
      for (int p = 0; p < kDim; ++p)
        for (int q = 0; q < kDim; ++q) {
          m = std::max(m, std::abs(r20(k, j, p, q) + r20(j, k, p, q)));
          m = std::max(m, std::abs(r02(k, j, p, q) + r02(j, k, p, q)));
          m = std::max(m, std::abs(r02(k, j, p, q) + std::conj(r20(k, j, q, p))));
          m = std::max(m, std::abs(r11(k, j, p, q) - std::conj(r11(j, k, q, p))));
        }
  return m;
}

CurvatureTensor curvature_orthonormal(const StructureConstants& c, double kappa) {
  const double lin = kappa - kappa * kappa;
  const double quad = kappa * kappa;
  CurvatureTensor out;
  for (int k = 0; k < kDim; ++k)
    for (int j = 0; j < kDim; ++j)
      for (int p = 0; p < kDim; ++p)
        for (int q = 0; q < kDim; ++q) {
          Complex s20{}, s02{}, s11{};
          for (int r = 0; r < kDim; ++r) {
            s20 += c(r, k, j) * c(p, r, q);
            s02 += c(r, k, j) * c(q, r, p);
            s11 += -c(p, j, r) * std::conj(c(q, k, r)) + std::conj(c(r, k, p)) * c(r, j, q);
          }
          out.r20(k, j, p, q) = lin * s20;
          out.r02(k, j, p, q) = -lin * std::conj(s02);
          out.r11(k, j, p, q) = quad * s11;
        }
  return out;
}

double TrRmComponents::off_type_max() const {
  return std::max({c40.max_abs(), c31.max_abs(), c13.max_abs(), c04.max_abs()});
}

TrRmComponents full_tr_rm_wedge_rm_components(const StructureConstants& c, double kappa) {
  const CurvatureTensor rm = curvature_orthonormal(c, kappa);
  TrRmComponents out;
  out.c40 = pure_type_square(rm.r20);
  out.c04 = pure_type_square(rm.r02);
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int k = 0; k < kDim; ++k) {
          // (3,1): barred a = l, holomorphic (i, j, k)
          out.c31(a, i, j, k) = 2.0 * (block_trace(rm.r20, i, j, rm.r11, a, k) +
                                       block_trace(rm.r20, k, i, rm.r11, a, j) +
                                       block_trace(rm.r20, j, k, rm.r11, a, i));
          // (1,3): barred (a, i, j) = (i, j, k) of the display, holomorphic k = l
          out.c13(a, i, j, k) = 2.0 * (block_trace(rm.r02, a, i, rm.r11, j, k) +
                                       block_trace(rm.r02, i, j, rm.r11, a, k) +
                                       block_trace(rm.r02, j, a, rm.r11, i, k));
          // (2,2): barred (a, i) = (k, l), holomorphic (j, k) = (i, j)
          out.c22(a, i, j, k) = 2.0 * block_trace(rm.r02, a, i, rm.r20, j, k) +
                                2.0 * (block_trace(rm.r11, a, k, rm.r11, i, j) -
                                       block_trace(rm.r11, a, j, rm.r11, i, k));
        }
  return out;
}

FourForm22 tr_rm_wedge_rm(const StructureConstants& c, const HermitianMetric& g, double kappa) {
  const BasisChange p = orthonormalizing_basis(g);
  const StructureConstants k = transform_structure_constants(c, p);
  const TrRmComponents comps = full_tr_rm_wedge_rm_components(k, kappa);
  const FourForm22 in_frame = FourForm22::antisymmetrized(0.25 * comps.c22);
  return in_frame.pulled_back(p);
}

Matrix3c anomaly_kernel(const StructureConstants& c, const HermitianMetric& g, double beta) {
  const Matrix3c& ginv = g.inverse();
  // v[l][m][n] = sum_j conj(c^l_{mj}) g^{nj̄}
  Tensor3 v;
  for (int l = 0; l < kDim; ++l)
    for (int m = 0; m < kDim; ++m)
      for (int n = 0; n < kDim; ++n)
        for (int j = 0; j < kDim; ++j) v(l, m, n) += std::conj(c(l, m, j)) * ginv(n, j);
  // u[i][m][n] = sum_l g_{l̄i} v[l][m][n]
  Tensor3 u;
  for (int i = 0; i < kDim; ++i)
    for (int m = 0; m < kDim; ++m)
      for (int n = 0; n < kDim; ++n)
        for (int l = 0; l < kDim; ++l) u(i, m, n) += g(l, i) * v(l, m, n);
  Matrix3c kernel = g.matrix();
  for (int m = 0; m < kDim; ++m)
    for (int s = 0; s < kDim; ++s) {
      Complex w{};
      for (int i = 0; i < kDim; ++i)
        for (int n = 0; n < kDim; ++n) w += u(i, m, n) * c(i, s, n);
      kernel(m, s) -= beta * w;
    }
  return kernel;
}

FourForm22 anomaly_form(const StructureConstants& c, const HermitianMetric& g, const ConnectionParams& params) {
  return i_del_delbar_omega(c, g) - (params.alpha_prime() / 4.0) * tr_rm_wedge_rm(c, g, params.kappa());
}

FourForm22 anomaly_form_combined(const StructureConstants& c, const HermitianMetric& g,
                                 const ConnectionParams& params) {
  const Matrix3c kernel = anomaly_kernel(c, g, params.beta());
  Tensor3 w;  // w[m][c][d] = K[m][s] c^s_{cd}
  for (int m = 0; m < kDim; ++m)
    for (int cc = 0; cc < kDim; ++cc)
      for (int d = 0; d < kDim; ++d)
        for (int s = 0; s < kDim; ++s) w(m, cc, d) += kernel(m, s) * c(s, cc, d);
  Tensor4 raw;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int d = 0; d < kDim; ++d) {
          Complex s{};
          for (int m = 0; m < kDim; ++m) s += std::conj(c(m, a, b)) * w(m, cc, d);
          raw(a, b, cc, d) = 0.25 * s;
        }
  return FourForm22::antisymmetrized(raw);
}

}  // namespace anomaly
