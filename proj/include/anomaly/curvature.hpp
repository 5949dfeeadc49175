#pragma once

// Connections on the line through the Chern (kappa = 0), Lichnerowicz
// (kappa = 1/2) and Bismut (kappa = 1) connections, their curvature on a Lie
// group, and the anomaly form Phi = i d dbar omega - (alpha'/4) Tr(Rm ∧ Rm).

#include "anomaly/algebra.hpp"
#include "anomaly/geometry.hpp"
#include "anomaly/tensor.hpp"

namespace anomaly {

/// Deliberate corruptions of tau, used only to check that the verification
/// suite notices them.
enum class TauMutation { None, Negated, InnerSignFlipped };
void set_tau_mutation(TauMutation m);
TauMutation tau_mutation();

class ConnectionParams {
 public:
  ConnectionParams(double kappa, double alpha_prime) : kappa_(kappa), alpha_prime_(alpha_prime) {}

  static ConnectionParams chern(double alpha_prime) { return {0.0, alpha_prime}; }
  static ConnectionParams lichnerowicz(double alpha_prime) { return {0.5, alpha_prime}; }
  static ConnectionParams bismut(double alpha_prime) { return {1.0, alpha_prime}; }

  double kappa() const { return kappa_; }
  double alpha_prime() const { return alpha_prime_; }
  /// tau = 2 kappa^2 (2 kappa - 1)
  double tau() const;
  /// beta = alpha' tau / 4
  double beta() const { return alpha_prime_ * tau() / 4.0; }

 private:
  double kappa_;
  double alpha_prime_;
};

struct ConnectionCoefficients {
  Tensor3 holomorphic;      ///< A^a_{bd} = kappa c^a_{bd}
  Tensor3 antiholomorphic;  ///< A^a_{b̄d} = -kappa conj(c^d_{ba})
};

ConnectionCoefficients connection_coefficients(const StructureConstants& c, double kappa);

/// Curvature blocks in an orthonormal frame, each indexed [k][j][p][q].
struct CurvatureTensor {
  Tensor4 r20;  ///< R_{kj}^p_q
  Tensor4 r02;  ///< R_{k̄j̄}^p_q
  Tensor4 r11;  ///< R_{k̄j}^p_q

  /// Largest violation of the antisymmetry and conjugation relations between
  /// the blocks.
  double symmetry_defect() const;
};

CurvatureTensor curvature_orthonormal(const StructureConstants& c, double kappa);

/// Type components of Tr(Rm ∧ Rm) in the orthonormal frame, assembled from
/// the curvature blocks by wedge-trace sums. Barred indices come first.
struct TrRmComponents {
  Tensor4 c40;  ///< [i][j][k][l]
  Tensor4 c31;  ///< [l̄][i][j][k]
  Tensor4 c22;  ///< [k̄][l̄][i][j]
  Tensor4 c13;  ///< [ī][j̄][k̄][l]
  Tensor4 c04;  ///< [ī][j̄][k̄][l̄]

  /// max norm over the (4,0), (3,1), (1,3), (0,4) parts
  double off_type_max() const;
};

TrRmComponents full_tr_rm_wedge_rm_components(const StructureConstants& c, double kappa);

/// Tr(Rm ∧ Rm) for a general metric: orthonormalize, assemble the (2,2) part
/// from the curvature blocks (frame factor 1/4), pull back to the e-frame.
FourForm22 tr_rm_wedge_rm(const StructureConstants& c, const HermitianMetric& g, double kappa);

/// K[m][s] = g_{m̄s} - beta * g_{l̄i} g^{nj̄} conj(c^l_{mj}) c^i_{sn}. Both Phi
/// and the flow velocity are conj(c^m_{..}) K[m][s] c^s_{..} contractions.
Matrix3c anomaly_kernel(const StructureConstants& c, const HermitianMetric& g, double beta);

/// Phi = i d dbar omega - (alpha'/4) Tr(Rm ∧ Rm), via the curvature route.
FourForm22 anomaly_form(const StructureConstants& c, const HermitianMetric& g, const ConnectionParams& params);

/// Phi from the closed formula (1/4) conj(c^m_{ab}) K[m][s] c^s_{cd}.
FourForm22 anomaly_form_combined(const StructureConstants& c, const HermitianMetric& g,
                                 const ConnectionParams& params);

}  // namespace anomaly
