#pragma once

// The anomaly flow as an ODE for the metric matrix, with an explicit
// Runge-Kutta integrator, event detection and per-group monitors.

#include "anomaly/algebra.hpp"
#include "anomaly/curvature.hpp"
#include "anomaly/geometry.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anomaly {

using Vector9d = Eigen::Matrix<double, 9, 1>;
using Matrix9d = Eigen::Matrix<double, 9, 9>;

/// Names of the 9 real coordinates, in storage order.
inline constexpr std::array<std::string_view, 9> kCoordinateNames = {
    "re_g11", "re_g22", "re_g33", "re_g12", "im_g12", "re_g13", "im_g13", "re_g23", "im_g23"};

/// Diagonal reals followed by (re, im) of the upper off-diagonal entries.
/// Off-diagonals are read from the Hermitian part of m.
Vector9d to_coordinates(const Matrix3c& m);
Matrix3c from_coordinates(const Vector9d& y);

/// d/dt g_{āb} = (1/(2||Omega||)) g^{dp̄} conj(c^m_{ap}) K[m][s] c^s_{bd}, see anomaly_kernel.
/// Returned as computed, without Hermitian averaging.
Matrix3c rhs(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params);

/// Metric velocity encoded by a (2,2)-form: (2/||Omega||) g^{dp̄} F[a][p][b][d].
Matrix3c velocity_from_form(const FourForm22& form, const HermitianMetric& g);

/// Central difference of ||Omega|| omega^2 along g + t rhs(g), compared with
/// the anomaly form. Returns the max entrywise discrepancy.
double flow_form_consistency(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params,
                             double h = 1e-5);

struct FlowState {
  double t = 0.0;
  HermitianMetric g = HermitianMetric::identity();
};

enum class Scheme { RK4Fixed, RKF45Adaptive };
enum class Direction { Forward, Backward };
enum class Termination { ReachedHorizon, Stationary, BlowUp, Degenerate, StepUnderflow };

std::string to_string(Scheme s);
std::string to_string(Direction d);
std::string to_string(Termination t);
std::optional<Scheme> parse_scheme(std::string_view name);
std::optional<Direction> parse_direction(std::string_view name);

struct IntegratorConfig {
  Scheme scheme = Scheme::RKF45Adaptive;
  double dt = 1e-3;  ///< fixed step, or first trial step when adaptive
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double t_max = 1.0;  ///< length of the time interval, in either direction
  Direction direction = Direction::Forward;

  double stationary_tol = 1e-10;  ///< on the max-norm of the rhs
  double blow_up_cap = 1e8;       ///< on the largest eigenvalue
  double degeneracy_floor = 1e-10;  ///< on the smallest eigenvalue
  double dt_min = 1e-12;
  std::size_t max_steps = 10'000'000;

  /// Throws InvalidConfig.
  void validate() const;
};

struct MonitorRecord {
  double det_g = 0.0;
  double omega_norm = 0.0;
  double rhs_norm = 0.0;
  std::vector<std::pair<std::string, double>> extras;

  std::optional<double> get(std::string_view name) const;
  bool all_finite() const;
};

/// Monitors for a state of a catalog group. rhs_norm is evaluated with the
/// catalog constants.
///   nilpotent: lambda1..3, lambda1_over_lambda2, offdiag_max and their drifts
///   solvable:  a, b, c, d, C, g_inv33, abs_g12 and relative drifts
///   sl2c:      sorted eigenvalues, diagonal entries, equality flags, offdiag_max
MonitorRecord monitors(const FlowState& state, GroupKind group, const FlowState& initial,
                       const ConnectionParams& params);

struct Sample {
  FlowState state;
  MonitorRecord monitors;
};

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  double min_dt = 0.0;
  double max_dt = 0.0;
  /// max |R - R^H| over evaluated velocities, removed by re-Hermitization
  double max_hermiticity_defect = 0.0;
};

struct Trajectory {
  std::vector<Sample> samples;
  Termination termination = Termination::ReachedHorizon;
  IntegrationStats stats;
  std::string note;

  const Sample& final_sample() const { return samples.back(); }
};

/// Integrates from `initial` over config.t_max in config.direction. Monitors
/// are group-specific when c is a catalog entry. Every accepted step is kept.
Trajectory integrate(const FlowState& initial, const StructureConstants& c, const ConnectionParams& params,
                     const IntegratorConfig& config);

}  // namespace anomaly
