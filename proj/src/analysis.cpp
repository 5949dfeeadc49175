#include "anomaly/analysis.hpp"

#include "anomaly/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace anomaly {

namespace {

std::optional<HermitianMetric> try_metric(const Vector9d& y) {
  if (!y.allFinite()) return std::nullopt;
  try {
    return HermitianMetric(from_coordinates(y));
  } catch (const Error&) {
    return std::nullopt;
  }
}

double velocity_norm(const Matrix3c& v) { return (0.5 * (v + v.adjoint())).cwiseAbs().maxCoeff(); }

StationaryClass classify(const StructureConstants& c, const HermitianMetric& g, double beta) {
  const auto kind = identify_kind(c);
  if (!kind) return StationaryClass::None;
  switch (*kind) {
    case GroupKind::Abelian:
      return StationaryClass::AbelianAny;
    case GroupKind::Nilpotent:
      return StationaryClass::None;
    case GroupKind::Solvable:
      return beta > 0.0 && classify_solvable_stationary(g, beta, 1e-8) ? StationaryClass::SolvableFamily
                                                                       : StationaryClass::None;
    case GroupKind::SL2C:
      return beta > 0.0 && on_sl2c_stationary_orbit(g, beta, 1e-6) ? StationaryClass::SL2CUnique : StationaryClass::None;
  }
  return StationaryClass::None;
}

}  // namespace

std::string to_string(StationaryClass c) {
  switch (c) {
    case StationaryClass::SolvableFamily: return "SolvableFamily";
    case StationaryClass::SL2CUnique: return "SL2CUnique";
    case StationaryClass::AbelianAny: return "AbelianAny";
    case StationaryClass::None: return "None";
  }
  return "None";
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::AsymptoticallyStable: return "AsymptoticallyStable";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
  }
  return "Marginal";
}

StationaryReport find_stationary(const StructureConstants& c, const ConnectionParams& params,
                                 const HermitianMetric& guess, const NewtonOptions& options) {
  StationaryReport report;
  const double beta = params.beta();
  if (beta <= 0.0 && identify_kind(c) != GroupKind::Abelian)
    report.warnings.push_back("beta <= 0: only abelian groups have stationary points");

  HermitianMetric g = guess;
  Vector9d y = to_coordinates(g.matrix());
  Matrix3c v = rhs(g, c, params);
  Vector9d f = to_coordinates(v);
  double rnorm = velocity_norm(v);
  bool done = rnorm == 0.0;
  std::string stop_reason;

  int it = 0;
  while (!done && it < options.max_iter) {
    ++it;
    const Matrix9d jac = jacobian(g, c, params);
    if (jac.cwiseAbs().maxCoeff() == 0.0) throw SingularJacobian("Jacobian vanishes at a non-stationary point");
    Eigen::CompleteOrthogonalDecomposition<Matrix9d> cod;
    cod.setThreshold(1e-8);
    cod.compute(jac);
    const Vector9d step = -cod.solve(f);

    bool accepted = false;
    double alpha = 1.0;
    for (int k = 0; k <= options.max_halvings; ++k, alpha *= 0.5) {
      const Vector9d trial = y + alpha * step;
      auto gt = try_metric(trial);
      if (!gt) continue;
      const Matrix3c vt = rhs(*gt, c, params);
      const Vector9d ft = to_coordinates(vt);
      if (!(ft.norm() < f.norm())) continue;
      y = trial;
      g = *gt;
      v = vt;
      f = ft;
      rnorm = velocity_norm(vt);
      accepted = true;
      break;
    }
    if (!accepted) {
      if (rnorm <= options.tol) {
        done = true;
      } else {
        stop_reason = "line search failed to reduce the residual";
        break;
      }
    }
    if (g.eigenvalues()(0) < options.min_eigenvalue) {
      stop_reason = "iterates approach the boundary of the positive cone";
      break;
    }
    if (accepted && rnorm <= options.tol && (alpha * step).norm() <= options.step_tol * (1.0 + y.norm())) done = true;
    if (rnorm == 0.0) done = true;
  }
  if (!done && stop_reason.empty()) {
    if (rnorm <= options.tol) {
      done = true;
    } else {
      stop_reason = "iteration limit reached";
    }
  }

  report.metric = g;
  report.rhs_norm = rnorm;
  report.iterations = it;
  report.converged = done && rnorm <= options.tol && g.eigenvalues()(0) >= options.min_eigenvalue;
  if (report.converged) {
    report.classification = classify(c, g, beta);
    report.message = "converged";
  } else {
    report.classification = StationaryClass::None;
    report.message = stop_reason.empty() ? "no stationary point found" : "no stationary point found: " + stop_reason;
  }
  return report;
}

bool on_sl2c_stationary_orbit(const HermitianMetric& g, double beta, double tol) {
  if (!(beta > 0.0)) return false;
  const Matrix3c defect = g.matrix().conjugate() * g.matrix() - 4.0 * beta * beta * Matrix3c::Identity();
  return defect.cwiseAbs().maxCoeff() <= tol * std::max(1.0, 4.0 * beta * beta);
}

bool classify_solvable_stationary(const HermitianMetric& g, double beta, double tol) {
  if (!(beta > 0.0)) return false;
  if (std::abs(g(0, 1)) > tol) return false;
  const double g_inv33 = g.inverse()(2, 2).real();
  if (std::abs(g_inv33 - 1.0 / beta) > tol) return false;
  const double lhs = std::norm(g(0, 2)) / g(0, 0).real() + std::norm(g(1, 2)) / g(1, 1).real();
  return std::abs(lhs - (g(2, 2).real() - beta)) <= tol * std::max(1.0, beta * beta);
}

Matrix9d jacobian(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params, double h) {
  if (h <= 0.0) h = 1e-6 * (1.0 + g.matrix().norm());
  const Vector9d y = to_coordinates(g.matrix());
  for (int attempt = 0; attempt < 4; ++attempt, h *= 0.1) {
    Matrix9d jac;
    bool ok = true;
    for (int i = 0; i < 9 && ok; ++i) {
      Vector9d yp = y, ym = y;
      yp(i) += h;
      ym(i) -= h;
      auto gp = try_metric(yp);
      auto gm = try_metric(ym);
      if (!gp || !gm) {
        ok = false;
        break;
      }
      jac.col(i) = (to_coordinates(rhs(*gp, c, params)) - to_coordinates(rhs(*gm, c, params))) / (2.0 * h);
    }
    if (ok) return jac;
  }
  throw DegenerateMetric("finite-difference probes leave the positive cone");
}

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidInput("eigenvalues: matrix is not square");
  if (!m.allFinite()) throw InvalidInput("eigenvalues: matrix has non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, true);
  if (solver.info() != Eigen::Success) throw NoConvergence("eigenvalue iteration did not converge");
  const Eigen::VectorXcd vals = solver.eigenvalues();
  const Eigen::MatrixXcd vecs = solver.eigenvectors();
  const Eigen::MatrixXcd mc = m.cast<Complex>();
  const double scale = m.norm();
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    const double res = (mc * vecs.col(k) - vals(k) * vecs.col(k)).norm() / std::max(vecs.col(k).norm(), 1e-300);
    if (res > 0.0 && res > 1e-8 * scale) {
      std::ostringstream msg;
      msg << "eigenpair residual " << res << " exceeds 1e-8 |m| = " << 1e-8 * scale;
      throw NoConvergence(msg.str());
    }
  }
  std::vector<Complex> out(vals.data(), vals.data() + vals.size());
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

Stability classify_stability(const std::vector<Complex>& eigs, double spectral_tol) {
  double max_re = -std::numeric_limits<double>::infinity();
  for (const auto& e : eigs) max_re = std::max(max_re, e.real());
  if (max_re > spectral_tol) return Stability::Unstable;
  if (max_re >= -spectral_tol) return Stability::Marginal;
  return Stability::AsymptoticallyStable;
}

SpectrumReport linearize(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params,
                         double spectral_tol) {
  SpectrumReport r;
  r.jacobian = jacobian(g, c, params);
  r.eigenvalues = eigenvalues(r.jacobian);
  r.stability = classify_stability(r.eigenvalues, spectral_tol);
  r.max_real_part = r.eigenvalues.back().real();
  for (const auto& e : r.eigenvalues) r.max_real_part = std::max(r.max_real_part, e.real());
  r.rhs_norm = velocity_norm(rhs(g, c, params));
  return r;
}

std::array<double, 3> nilpotent_diagonal_oracle(const std::array<double, 3>& lambda0, double t) {
  const HermitianMetric g0 = HermitianMetric::diagonal(lambda0[0], lambda0[1], lambda0[2]);
  // the nilpotent rhs does not depend on the connection parameters
  const Matrix3c v = rhs(g0, catalog(GroupKind::Nilpotent), ConnectionParams(0.0, 0.0));
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = lambda0[i] + t * v(i, i).real();
    if (!(out[i] > 0.0)) throw DomainError("nilpotent diagonal solution leaves the positive cone");
  }
  return out;
}

HermitianMetric solvable_reduced_oracle(const HermitianMetric& initial, double beta, double t) {
  const Matrix3c& m = initial.matrix();
  if (std::abs(m(0, 1)) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw InvalidInput("solvable oracle requires g_12 = 0");
  const double lam0 = m(0, 0).real();
  const double a = m(1, 1).real() / lam0;
  const double b = std::abs(m(0, 2)) / lam0;
  const double c = std::abs(m(1, 2)) / lam0;
  const double d = lam0 * lam0 * initial.inverse()(2, 2).real();
  const double lam_sq = beta * d + (lam0 * lam0 - beta * d) * std::exp(std::sqrt(a * d) * t);
  if (!(lam_sq > 0.0)) throw DomainError("solvable solution leaves the positive cone");
  const double lam = std::sqrt(lam_sq);

  auto phase = [](Complex z) { return std::abs(z) > 0.0 ? z / std::abs(z) : Complex(1.0); };
  Matrix3c g = Matrix3c::Zero();
  g(0, 0) = lam;
  g(1, 1) = a * lam;
  g(0, 2) = b * lam * phase(m(0, 2));
  g(1, 2) = c * lam * phase(m(1, 2));
  g(2, 2) = lam_sq / d + (c * c / a + b * b) * lam;
  g(2, 0) = std::conj(g(0, 2));
  g(2, 1) = std::conj(g(1, 2));
  try {
    return HermitianMetric(g);
  } catch (const Error& e) {
    throw DomainError(std::string("solvable solution leaves the positive cone: ") + e.what());
  }
}

double sl2c_isotropic_constant(double lambda0, double beta) {
  if (!(lambda0 > 0.0) || !(beta > 0.0)) throw DomainError("isotropic solution needs lambda0 > 0 and beta > 0");
  const double s = std::sqrt(2.0 * beta);
  const double u = std::sqrt(lambda0);
  return std::abs((u - s) / (u + s));
}

double blow_up_time(double lambda0, double beta) {
  const double c = sl2c_isotropic_constant(lambda0, beta);
  if (c == 0.0) throw DomainError("the stationary isotropic metric exists for all time");
  return std::log(1.0 / c) / std::sqrt(2.0 * beta);
}

double sl2c_isotropic_oracle(double lambda0, double beta, double t) {
  const double c = sl2c_isotropic_constant(lambda0, beta);
  const double two_beta = 2.0 * beta;
  if (c == 0.0) return two_beta;
  const double w = c * std::exp(std::sqrt(two_beta) * t);
  if (!(w < 1.0)) throw DomainError("t is at or beyond the blow-up time");
  const double r = lambda0 > two_beta ? (1.0 + w) / (1.0 - w) : (1.0 - w) / (1.0 + w);
  return two_beta * r * r;
}

std::array<double, 3> sl2c_diagonal_rhs(const std::array<double, 3>& lambda, double beta) {
  const double pre = std::sqrt(lambda[0] * lambda[1] * lambda[2]) / 2.0;
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const double li = lambda[i];
    const double lj = lambda[(i + 1) % 3];
    const double lk = lambda[(i + 2) % 3];
    out[i] = pre * (lk / lj + lj / lk - 2.0 * beta / li - beta * li / (lj * lj) - beta * li / (lk * lk));
  }
  return out;
}

}  // namespace anomaly
