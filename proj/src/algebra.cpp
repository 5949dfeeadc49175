#include "anomaly/algebra.hpp"

#include "anomaly/error.hpp"

#include <cmath>
#include <sstream>

namespace anomaly {

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Abelian:
      return "abelian";
    case GroupKind::Nilpotent:
      return "nilpotent";
    case GroupKind::Solvable:
      return "solvable";
    case GroupKind::SL2C:
      return "sl2c";
  }
  return "unknown";
}

std::optional<GroupKind> parse_group_kind(std::string_view name) {
  if (name == "abelian") return GroupKind::Abelian;
  if (name == "nilpotent") return GroupKind::Nilpotent;
  if (name == "solvable") return GroupKind::Solvable;
  if (name == "sl2c") return GroupKind::SL2C;
  return std::nullopt;
}

StructureConstants::StructureConstants(const Tensor3& raw) {
  for (int d = 0; d < kDim; ++d)
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b) {
        c_(d, a, b) = 0.5 * (raw(d, a, b) - raw(d, b, a));
        symmetric_defect_ = std::max(symmetric_defect_, 0.5 * std::abs(raw(d, a, b) + raw(d, b, a)));
      }
}

double StructureConstants::antisymmetry_defect() const {
  double m = 0.0;
  for (int d = 0; d < kDim; ++d)
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b) m = std::max(m, std::abs(c_(d, a, b) + c_(d, b, a)));
  return m;
}

BasisChange::BasisChange(const Matrix3c& p, double tol) : p_(p) {
  const double det = std::abs(p.determinant());
  if (!(det > tol)) {
    std::ostringstream msg;
    msg << "basis change is singular: |det P| = " << det;
    throw SingularBasisChange(msg.str());
  }
  p_inv_ = p.inverse();
}

StructureConstants catalog(GroupKind kind) {
  Tensor3 c;
  switch (kind) {
    case GroupKind::Abelian:
      break;
    case GroupKind::Nilpotent:
      // [e1, e2] = e3
      c(2, 0, 1) = 1.0;
      c(2, 1, 0) = -1.0;
      break;
    case GroupKind::Solvable:
      // [e3, e1] = e1, [e3, e2] = -e2
      c(0, 2, 0) = 1.0;
      c(0, 0, 2) = -1.0;
      c(1, 2, 1) = -1.0;
      c(1, 1, 2) = 1.0;
      break;
    case GroupKind::SL2C:
      // c^k_{ij} = epsilon_{kij}
      for (int k = 0; k < kDim; ++k) {
        const int i = (k + 1) % kDim;
        const int j = (k + 2) % kDim;
        c(k, i, j) = 1.0;
        c(k, j, i) = -1.0;
      }
      break;
  }
  return StructureConstants(c);
}

std::optional<GroupKind> identify_kind(const StructureConstants& c, double tol) {
  for (GroupKind kind : {GroupKind::Abelian, GroupKind::Nilpotent, GroupKind::Solvable, GroupKind::SL2C}) {
    if (max_abs_diff(c.array(), catalog(kind).array()) <= tol) return kind;
  }
  return std::nullopt;
}

double jacobi_residual(const StructureConstants& c) {
  double m = 0.0;
  for (int q = 0; q < kDim; ++q)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int k = 0; k < kDim; ++k) {
          Complex s{};
          for (int r = 0; r < kDim; ++r)
            s += c(q, i, r) * c(r, j, k) + c(q, k, r) * c(r, i, j) + c(q, j, r) * c(r, k, i);
          m = std::max(m, std::abs(s));
        }
  return m;
}

double unimodularity_defect(const StructureConstants& c) {
  double m = 0.0;
  for (int b = 0; b < kDim; ++b) {
    Complex s{};
    for (int a = 0; a < kDim; ++a) s += c(a, a, b);
    m = std::max(m, std::abs(s));
  }
  return m;
}

bool is_unimodular(const StructureConstants& c, double tol) { return unimodularity_defect(c) <= tol; }

StructureConstants transform_structure_constants(const StructureConstants& c, const BasisChange& p) {
  const Matrix3c& P = p.matrix();
  const Matrix3c& Pinv = p.inverse();
  // t^s_{iq} = P^r_i c^s_{rq}, u^s_{ij} = P^q_j t^s_{iq}, k^l_{ij} = (P^-1)^l_s u^s_{ij}
  Tensor3 t, u, k;
  for (int s = 0; s < kDim; ++s)
    for (int i = 0; i < kDim; ++i)
      for (int q = 0; q < kDim; ++q)
        for (int r = 0; r < kDim; ++r) t(s, i, q) += P(r, i) * c(s, r, q);
  for (int s = 0; s < kDim; ++s)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int q = 0; q < kDim; ++q) u(s, i, j) += P(q, j) * t(s, i, q);
  for (int l = 0; l < kDim; ++l)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int s = 0; s < kDim; ++s) k(l, i, j) += Pinv(l, s) * u(s, i, j);
  return StructureConstants(k);
}

}  // namespace anomaly
