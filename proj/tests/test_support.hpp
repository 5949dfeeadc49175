#pragma once

#include "anomaly/algebra.hpp"
#include "anomaly/geometry.hpp"
#include "anomaly/sampling.hpp"

#include <random>
#include <vector>

namespace anomaly::testing {

using anomaly::random_metric;

inline Matrix3c random_invertible(std::mt19937_64& rng) { return random_basis_change(rng).matrix(); }

inline Tensor3 random_tensor3(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Tensor3 t;
  for (int d = 0; d < 3; ++d)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) t(d, a, b) = Complex(normal(rng), normal(rng));
  return t;
}

inline std::vector<GroupKind> all_kinds() {
  return {GroupKind::Abelian, GroupKind::Nilpotent, GroupKind::Solvable, GroupKind::SL2C};
}

}  // namespace anomaly::testing
