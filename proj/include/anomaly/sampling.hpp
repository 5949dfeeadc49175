#pragma once

// Seeded random inputs for property checks.

#include "anomaly/algebra.hpp"
#include "anomaly/geometry.hpp"

#include <random>

namespace anomaly {

/// U diag(lambda) U^H with lambda uniform in [lo, hi] and U unitary (QR of a
/// complex Gaussian matrix).
HermitianMetric random_metric(std::mt19937_64& rng, double lo = 0.5, double hi = 2.0);

/// Complex Gaussian matrix plus 2 I, redrawn until its condition number is at
/// most max_condition.
BasisChange random_basis_change(std::mt19937_64& rng, double max_condition = 1e3);

/// Metric with g_{1̄2} = 0; the Schur complement of g_{3̄3} is drawn from [lo, hi].
HermitianMetric random_solvable_metric(std::mt19937_64& rng, double lo = 0.5, double hi = 2.0);

}  // namespace anomaly
