#include "anomaly/sampling.hpp"

#include <Eigen/SVD>

namespace anomaly {

namespace {

Matrix3c gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix3c z;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = Complex(normal(rng), normal(rng));
  return z;
}

}  // namespace

HermitianMetric random_metric(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Eigen::HouseholderQR<Matrix3c> qr(gaussian(rng));
  const Matrix3c u = qr.householderQ();
  const Eigen::Vector3d lam(uni(rng), uni(rng), uni(rng));
  return HermitianMetric::hermitized(u * lam.cast<Complex>().asDiagonal() * u.adjoint());
}

BasisChange random_basis_change(std::mt19937_64& rng, double max_condition) {
  while (true) {
    const Matrix3c p = gaussian(rng) + 2.0 * Matrix3c::Identity();
    const Eigen::Vector3d sv = Eigen::JacobiSVD<Matrix3c>(p).singularValues();
    if (sv(2) > 0.0 && sv(0) / sv(2) <= max_condition) return BasisChange(p);
  }
}

HermitianMetric random_solvable_metric(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  Matrix3c g = Matrix3c::Zero();
  g(0, 0) = uni(rng);
  g(1, 1) = uni(rng);
  g(0, 2) = Complex(off(rng), off(rng));
  g(1, 2) = Complex(off(rng), off(rng));
  g(2, 0) = std::conj(g(0, 2));
  g(2, 1) = std::conj(g(1, 2));
  g(2, 2) = std::norm(g(0, 2)) / g(0, 0).real() + std::norm(g(1, 2)) / g(1, 1).real() + uni(rng);
  return HermitianMetric(g);
}

}  // namespace anomaly
