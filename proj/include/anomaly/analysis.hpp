#pragma once

// Stationary points, linearization and closed-form solutions of the flow.

#include "anomaly/algebra.hpp"
#include "anomaly/curvature.hpp"
#include "anomaly/flow.hpp"
#include "anomaly/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace anomaly {

enum class StationaryClass { SolvableFamily, SL2CUnique, AbelianAny, None };
enum class Stability { AsymptoticallyStable, Unstable, Marginal };

std::string to_string(StationaryClass c);
std::string to_string(Stability s);

struct NewtonOptions {
  int max_iter = 200;
  double tol = 1e-10;         ///< on the max-norm of the rhs
  double step_tol = 1e-10;    ///< relative size of the last Newton step
  int max_halvings = 20;
  double min_eigenvalue = 1e-6;  ///< iterates below this are treated as leaving the cone
};

struct StationaryReport {
  HermitianMetric metric = HermitianMetric::identity();
  double rhs_norm = 0.0;
  StationaryClass classification = StationaryClass::None;
  bool converged = false;
  int iterations = 0;
  std::string message;
  std::vector<std::string> warnings;
};

/// Damped Newton on the 9 real coordinates. Steps are the minimum-norm
/// solutions of the linearized system; each step is halved until the iterate
/// stays positive definite and the residual decreases. Iteration continues
/// past rhs_norm <= tol until the step itself is negligible.
StationaryReport find_stationary(const StructureConstants& c, const ConnectionParams& params,
                                 const HermitianMetric& guess, const NewtonOptions& options = {});

/// g_{1̄2} = 0 and g^{33̄} = 1/beta, cross-checked against
/// |g_{1̄3}|^2/g_{1̄1} + |g_{2̄3}|^2/g_{2̄2} = g_{3̄3} - beta.
bool classify_solvable_stationary(const HermitianMetric& g, double beta, double tol);

/// conj(g) g = 4 beta^2 I: the sl2c stationary metrics, i.e. the images
/// 2 beta (O conj(O)^T)^-1 of 2 beta I under automorphisms O in SO(3,C).
bool on_sl2c_stationary_orbit(const HermitianMetric& g, double beta, double tol);

/// Central differences of the rhs in real coordinates. h <= 0 selects
/// 1e-6 (1 + |g|); the step is shrunk by 10 up to three times if a probe
/// leaves the positive cone.
Matrix9d jacobian(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params,
                  double h = 0.0);

/// All eigenvalues, sorted by real part then imaginary part. Throws
/// NoConvergence if the QR iteration fails or eigenpair residuals exceed
/// 1e-8 |m|.
std::vector<Complex> eigenvalues(const Eigen::MatrixXd& m);

Stability classify_stability(const std::vector<Complex>& eigs, double spectral_tol = 1e-7);

struct SpectrumReport {
  Matrix9d jacobian;
  std::vector<Complex> eigenvalues;
  Stability stability = Stability::Marginal;
  double max_real_part = 0.0;
  double rhs_norm = 0.0;
};

SpectrumReport linearize(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params,
                         double spectral_tol = 1e-7);

/// Diagonal nilpotent solution. The velocity of the diagonal entries is
/// constant along the flow, so lambda(t) = lambda(0) + t v with v the rhs at
/// lambda(0). Throws DomainError if an entry reaches zero.
std::array<double, 3> nilpotent_diagonal_oracle(const std::array<double, 3>& lambda0, double t);

/// Solvable solution for g_{1̄2}(0) = 0 from the conserved quantities a, b, c, d
/// and lambda^2(t) = beta d + (lambda^2(0) - beta d) exp(sqrt(ad) t).
HermitianMetric solvable_reduced_oracle(const HermitianMetric& initial, double beta, double t);

/// Isotropic sl2c solution lambda(t) for g(0) = lambda0 * identity.
double sl2c_isotropic_oracle(double lambda0, double beta, double t);
/// |(sqrt(lambda0) - sqrt(2 beta)) / (sqrt(lambda0) + sqrt(2 beta))|
double sl2c_isotropic_constant(double lambda0, double beta);
/// T = log(1/C) / sqrt(2 beta), where the isotropic solution leaves the cone.
double blow_up_time(double lambda0, double beta);

/// Eigenvalue velocities of diagonal sl2c metrics.
std::array<double, 3> sl2c_diagonal_rhs(const std::array<double, 3>& lambda, double beta);

}  // namespace anomaly
