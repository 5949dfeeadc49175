#pragma once

// Structure constants c^d_{ab} of a 3-dimensional complex Lie algebra,
// [e_a, e_b] = e_d c^d_{ab}. Indices are 0-based throughout the API.

#include "anomaly/tensor.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace anomaly {

inline constexpr double kDefaultTol = 1e-12;

enum class GroupKind { Abelian, Nilpotent, Solvable, SL2C };

std::string to_string(GroupKind kind);
/// Accepts the lower-case names "abelian", "nilpotent", "solvable", "sl2c".
std::optional<GroupKind> parse_group_kind(std::string_view name);

class StructureConstants {
 public:
  StructureConstants() = default;

  /// Stores the antisymmetric part (c - swap_ab(c)) / 2 of `raw`. The dropped
  /// symmetric part is kept in symmetric_defect(); anything above 1e-12 means
  /// the input was not a valid bracket table.
  explicit StructureConstants(const Tensor3& raw);

  /// c^d_{ab}
  const Complex& operator()(int d, int a, int b) const { return c_(d, a, b); }
  const Tensor3& array() const { return c_; }

  double symmetric_defect() const { return symmetric_defect_; }
  bool input_was_antisymmetric() const { return symmetric_defect_ <= kDefaultTol; }

  double antisymmetry_defect() const;

 private:
  Tensor3 c_;
  double symmetric_defect_ = 0.0;
};

/// Invertible change of frame f_i = e_r P^r_i.
class BasisChange {
 public:
  explicit BasisChange(const Matrix3c& p, double tol = kDefaultTol);

  static BasisChange identity() { return BasisChange(Matrix3c::Identity()); }

  const Matrix3c& matrix() const { return p_; }
  const Matrix3c& inverse() const { return p_inv_; }

 private:
  Matrix3c p_;
  Matrix3c p_inv_;
};

StructureConstants catalog(GroupKind kind);

/// Returns the catalog kind whose constants equal `c` entrywise within tol.
std::optional<GroupKind> identify_kind(const StructureConstants& c, double tol = kDefaultTol);

/// max over (q,i,j,k) of |c^q_{ir}c^r_{jk} + c^q_{kr}c^r_{ij} + c^q_{jr}c^r_{ki}|
double jacobi_residual(const StructureConstants& c);

/// max_b |sum_a c^a_{ab}|
double unimodularity_defect(const StructureConstants& c);
bool is_unimodular(const StructureConstants& c, double tol = kDefaultTol);

/// k^l_{ij} = (P^-1)^l_s P^r_i P^q_j c^s_{rq}
StructureConstants transform_structure_constants(const StructureConstants& c, const BasisChange& p);

}  // namespace anomaly
