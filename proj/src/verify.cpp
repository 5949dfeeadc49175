#include "anomaly/verify.hpp"

#include "anomaly/analysis.hpp"
#include "anomaly/curvature.hpp"
#include "anomaly/error.hpp"
#include "anomaly/flow.hpp"
#include "anomaly/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace anomaly {

namespace {

constexpr GroupKind kAllKinds[] = {GroupKind::Abelian, GroupKind::Nilpotent, GroupKind::Solvable, GroupKind::SL2C};

// Collects named maxima against pinned tolerances and boolean requirements.
class Tally {
 public:
  void at_most(const std::string& name, double value, double tol) {
    auto it = maxima_.find(name);
    if (it == maxima_.end()) {
      order_.push_back(name);
      maxima_[name] = {value, tol};
    } else if (!(value <= it->second.first)) {
      it->second.first = value;
    }
  }
  void at_least(const std::string& name, double value, double floor) {
    auto it = minima_.find(name);
    if (it == minima_.end()) {
      order_.push_back(name);
      minima_[name] = {value, floor};
    } else if (!(value >= it->second.first)) {
      it->second.first = value;
    }
  }
  void require(const std::string& name, bool ok) {
    auto it = flags_.find(name);
    if (it == flags_.end()) {
      order_.push_back(name);
      flags_[name] = ok;
    } else {
      it->second = it->second && ok;
    }
  }

  bool passed() const {
    for (const auto& [k, v] : maxima_)
      if (!(v.first <= v.second)) return false;
    for (const auto& [k, v] : minima_)
      if (!(v.first >= v.second)) return false;
    for (const auto& [k, v] : flags_)
      if (!v) return false;
    return true;
  }

  std::string detail() const {
    std::ostringstream os;
    os.precision(3);
    bool first = true;
    for (const auto& name : order_) {
      if (!first) os << "; ";
      first = false;
      if (auto it = maxima_.find(name); it != maxima_.end()) {
        const bool ok = it->second.first <= it->second.second;
        os << name << "=" << it->second.first << (ok ? "<=" : " EXCEEDS ") << it->second.second;
      } else if (auto jt = minima_.find(name); jt != minima_.end()) {
        const bool ok = jt->second.first >= jt->second.second;
        os << name << "=" << jt->second.first << (ok ? ">=" : " BELOW ") << jt->second.second;
      } else {
        os << name << (flags_.at(name) ? " ok" : " FAILED");
      }
    }
    return os.str();
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::pair<double, double>> maxima_;
  std::map<std::string, std::pair<double, double>> minima_;
  std::map<std::string, bool> flags_;
};

double max_entry(const Matrix3c& m) { return m.cwiseAbs().maxCoeff(); }

IntegratorConfig adaptive(double t_max, Direction dir = Direction::Forward) {
  IntegratorConfig cfg;
  cfg.scheme = Scheme::RKF45Adaptive;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.dt = 1e-3;
  cfg.t_max = t_max;
  cfg.direction = dir;
  return cfg;
}

double monitor(const Sample& s, const char* name) {
  auto v = s.monitors.get(name);
  return v ? *v : std::nan("");
}

// 1: curvature symmetries, vanishing off-type parts, Tr(Rm ∧ Rm) = 0 at kappa in {0, 1/2}
void curvature_suite(std::mt19937_64& rng, Tally& tally) {
  const double kappas[] = {-1.0, 0.0, 0.3, 0.5, 1.0, 2.0};
  for (auto kind : kAllKinds) {
    const auto c = catalog(kind);
    for (int trial = 0; trial < 100; ++trial) {
      const auto g = random_metric(rng);
      const auto k = transform_structure_constants(c, orthonormalizing_basis(g));
      for (double kappa : kappas) {
        tally.at_most("symmetry_defect", curvature_orthonormal(k, kappa).symmetry_defect(), 1e-13);
        tally.at_most("off_type_parts", full_tr_rm_wedge_rm_components(k, kappa).off_type_max(), 1e-12);
        if (kappa == 0.0 || kappa == 0.5) {
          const ConnectionParams params(kappa, 1.0);
          tally.at_most("tr_rm_at_chern_lichnerowicz", tr_rm_wedge_rm(c, g, kappa).max_abs(), 1e-12);
          // same quantity through the closed formula: (4/alpha') (i d dbar omega - Phi)
          const FourForm22 closed = 4.0 * (i_del_delbar_omega(c, g) - anomaly_form_combined(c, g, params));
          tally.at_most("tr_rm_closed_form_at_chern_lichnerowicz", closed.max_abs(), 1e-12);
        }
      }
    }
  }
}

// 2: rhs against the reduced systems of the nilpotent and solvable cases
void rhs_ground_truth(std::mt19937_64& rng, Tally& tally) {
  const double beta = 0.8;
  const ConnectionParams params(1.0, 2.0 * beta);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_metric(rng);
    const Matrix3c& G = g.inverse();
    const Complex k = 1.0 / (2.0 * omega_norm(g));

    const Matrix3c n = rhs(g, catalog(GroupKind::Nilpotent), params);
    tally.at_most("nilpotent_g11", std::abs(n(0, 0) - k * G(1, 1) * g(2, 2)), 1e-12);
    tally.at_most("nilpotent_g12", std::abs(n(0, 1) + k * G(0, 1) * g(2, 2)), 1e-12);
    tally.at_most("nilpotent_g22", std::abs(n(1, 1) - k * G(0, 0) * g(2, 2)), 1e-12);
    tally.at_most("nilpotent_gp3", std::max({std::abs(n(0, 2)), std::abs(n(1, 2)), std::abs(n(2, 2))}), 1e-12);

    const Matrix3c s = rhs(g, catalog(GroupKind::Solvable), params);
    const Complex g33 = G(2, 2);
    const Matrix3c& m = g.matrix();
    tally.at_most("solvable_g11", std::abs(s(0, 0) - k * (g33 * m(0, 0) - beta * g33 * g33 * m(0, 0))), 1e-12);
    tally.at_most("solvable_g12", std::abs(s(0, 1) - k * (g33 * m(0, 1) - beta * g33 * g33 * m(0, 1))), 1e-12);
    tally.at_most("solvable_g13",
                  std::abs(s(0, 2) - k * (-G(0, 2) * m(0, 0) + G(2, 1) * m(0, 1) + beta * G(0, 2) * g33 * m(0, 0) +
                                          beta * G(2, 1) * g33 * m(0, 1))),
                  1e-12);
    tally.at_most("solvable_g22", std::abs(s(1, 1) - k * (g33 * m(1, 1) - beta * g33 * g33 * m(1, 1))), 1e-12);
    tally.at_most("solvable_g23",
                  std::abs(s(1, 2) - k * (G(0, 2) * m(1, 0) - G(1, 2) * m(1, 1) + beta * G(0, 2) * g33 * m(1, 0) +
                                          beta * G(1, 2) * g33 * m(1, 1))),
                  1e-12);
    tally.at_most("solvable_g33",
                  std::abs(s(2, 2) - k * (G(0, 0) * m(0, 0) + G(1, 1) * m(1, 1) - G(1, 0) * m(0, 1) -
                                          G(0, 1) * m(1, 0) - beta * G(0, 0) * g33 * m(0, 0) -
                                          beta * G(1, 1) * g33 * m(1, 1) - beta * G(1, 0) * g33 * m(0, 1) -
                                          beta * G(0, 1) * g33 * m(1, 0))),
                  1e-12);

    tally.at_most("abelian", max_entry(rhs(g, catalog(GroupKind::Abelian), params)), 0.0);
  }
}

// 3: d/dt (||Omega|| omega^2) along the rhs equals the anomaly form
void form_consistency(std::mt19937_64& rng, Tally& tally) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_metric(rng);
    for (auto kind : kAllKinds)
      for (double kappa : {0.0, 0.5, 1.0})
        tally.at_most("flow_form_consistency", flow_form_consistency(g, catalog(kind), ConnectionParams(kappa, 1.0), 1e-5),
                      1e-7);
  }
}

// 4: nilpotent diagonal dynamics
void nilpotent_dynamics(Tally& tally) {
  const std::array<double, 3> l0{2.0, 1.0, 1.0};
  const auto traj = integrate(FlowState{0.0, HermitianMetric::diagonal(l0[0], l0[1], l0[2])},
                              catalog(GroupKind::Nilpotent), ConnectionParams(1.0, 1.0), adaptive(10.0));
  tally.require("reached_horizon", traj.termination == Termination::ReachedHorizon);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(traj.samples.size());
  for (const auto& s : traj.samples) {
    tally.at_most("lambda3_drift", monitor(s, "drift_lambda3"), 1e-9);
    tally.at_most("ratio_drift", monitor(s, "drift_ratio"), 1e-8);
    tally.at_most("offdiag", monitor(s, "offdiag_max"), 1e-10);
    const double t = s.state.t, y = s.state.g(0, 0).real();
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double residual = 0.0;
  for (const auto& s : traj.samples)
    residual = std::max(residual, std::abs(s.state.g(0, 0).real() - (intercept + slope * s.state.t)));
  tally.at_most("linear_fit_residual", residual, 1e-6);
  const double oracle_slope = nilpotent_diagonal_oracle(l0, 1.0)[0] - l0[0];
  tally.at_most("slope_vs_oracle", std::abs(slope - oracle_slope), 1e-8);
}

// 5: solvable dynamics with beta = 1
void solvable_dynamics(std::mt19937_64& rng, Tally& tally) {
  const double beta = 1.0;
  const ConnectionParams params(1.0, 2.0);
  const auto c = catalog(GroupKind::Solvable);

  std::vector<HermitianMetric> starts;
  for (int i = 0; i < 10; ++i) starts.push_back(random_solvable_metric(rng));
  for (const auto& g0 : starts) {
    // lambda^2 = beta d + (lambda0^2 - beta d) e^{sqrt(ad) t} reaches zero at t_collapse when lambda0^2 < beta d
    const double lam0 = g0(0, 0).real();
    const double a = g0(1, 1).real() / lam0, d = lam0 * lam0 * g0.inverse()(2, 2).real();
    double forward = 1.0;
    if (lam0 * lam0 < beta * d) {
      const double t_collapse = std::log(beta * d / (beta * d - lam0 * lam0)) / std::sqrt(a * d);
      const auto full = integrate(FlowState{0.0, g0}, c, params, adaptive(2.0 * t_collapse));
      tally.require("i_collapse_is_Degenerate", full.termination == Termination::Degenerate);
      tally.at_most("i_collapse_time_rel_error", std::abs(full.final_sample().state.t - t_collapse) / t_collapse, 0.01);
      forward = std::min(forward, 0.9 * t_collapse);
    }
    for (auto [dir, span] : {std::pair{Direction::Forward, forward}, std::pair{Direction::Backward, 5.0}}) {
      const auto traj = integrate(FlowState{0.0, g0}, c, params, adaptive(span, dir));
      tally.require("i_oracle_window_completed", traj.termination == Termination::ReachedHorizon);
      for (const auto& s : traj.samples) {
        tally.at_most("i_abs_g12", monitor(s, "abs_g12"), 1e-10);
        for (const char* name : {"drift_a", "drift_b", "drift_c", "drift_d"})
          tally.at_most("i_invariant_drift", monitor(s, name), 1e-6);
        const Matrix3c oracle = solvable_reduced_oracle(g0, beta, s.state.t).matrix();
        tally.at_most("i_oracle_rel_error", max_entry(s.state.g.matrix() - oracle) / max_entry(oracle), 1e-6);
      }
    }
    const auto back = integrate(FlowState{0.0, g0}, c, params, adaptive(500.0, Direction::Backward));
    tally.require("i_backward_run_alive", back.termination == Termination::Stationary ||
                                              back.termination == Termination::ReachedHorizon);
    tally.at_most("i_backward_g_inv33_minus_1", std::abs(monitor(back.final_sample(), "g_inv33") - 1.0 / beta), 1e-4);
  }

  Matrix3c m;
  m << 1.0, 0.2, Complex(0.0, 0.1), 0.2, 1.2, 0.1, Complex(0.0, -0.1), 0.1, 1.5;
  const HermitianMetric g0(m);
  for (auto dir : {Direction::Forward, Direction::Backward}) {
    const auto traj = integrate(FlowState{0.0, g0}, c, params, adaptive(2.0, dir));
    for (const auto& s : traj.samples) {
      tally.at_most("ii_ratio_g12_g11_drift", monitor(s, "drift_C"), 1e-6);
      tally.require("ii_never_stationary", !classify_solvable_stationary(s.state.g, beta, 1e-8));
    }
  }
}

// 6: sl2c stationary point and spectrum, beta = 1/2
void sl2c_stationary(std::mt19937_64& rng, Tally& tally) {
  const double beta = 0.5;
  const ConnectionParams params(1.0, 1.0);
  const auto c = catalog(GroupKind::SL2C);
  const Matrix3c target = 2.0 * beta * Matrix3c::Identity();
  std::uniform_real_distribution<double> u(-0.5 * beta / 3.0, 0.5 * beta / 3.0);

  std::vector<Matrix3c> found;
  int converged = 0, on_orbit = 0;
  for (int i = 0; i < 20; ++i) {
    Vector9d y = to_coordinates(target);
    for (int k = 0; k < 9; ++k) y(k) += u(rng);
    const auto r = find_stationary(c, params, HermitianMetric(from_coordinates(y)));
    if (r.converged) ++converged;
    if (on_sl2c_stationary_orbit(r.metric, beta, 1e-8)) ++on_orbit;
    found.push_back(r.metric.matrix());
    tally.at_most("newton_distance_to_2beta_identity", (r.metric.matrix() - target).norm(), 1e-6);
  }
  tally.at_least("newton_converged_of_20", converged, 20);
  double pairwise = 0.0;
  for (std::size_t i = 0; i < found.size(); ++i)
    for (std::size_t j = i + 1; j < found.size(); ++j) pairwise = std::max(pairwise, (found[i] - found[j]).norm());
  tally.at_most("newton_pairwise_distance", pairwise, 1e-6);
  tally.at_least("results_on_automorphism_orbit_of_20", on_orbit, 20);

  const Matrix9d jac = jacobian(HermitianMetric(target), c, params);
  Eigen::Matrix3d q;
  q << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  q *= std::sqrt(beta / 2.0);
  const Eigen::Matrix3d block = jac.topLeftCorner<3, 3>();
  tally.at_most("diagonal_block_vs_Q", (block - q).cwiseAbs().maxCoeff(), 1e-5);
  const auto qe = eigenvalues(block);
  const double expected[] = {-0.5, -0.5, 1.0};
  double qerr = 0.0;
  for (int i = 0; i < 3; ++i) qerr = std::max(qerr, std::abs(qe[i] - expected[i]));
  tally.at_most("Q_eigenvalues", qerr, 1e-6);
  const auto eig = eigenvalues(jac);
  tally.at_least("max_real_part_full_spectrum", eig.back().real(), 1e-7);
  tally.require("unstable", classify_stability(eig, 1e-7) == Stability::Unstable);
}

// 7: sl2c isotropic line, beta = 1/2
void sl2c_isotropic(Tally& tally) {
  const double beta = 0.5;
  const ConnectionParams params(1.0, 1.0);
  const auto c = catalog(GroupKind::SL2C);
  const double exact_t = std::log(3.0);
  for (double l0 : {4.0, 0.25}) {
    const std::string tag = l0 > 2.0 * beta ? "up_" : "down_";
    tally.at_most(tag + "C_error", std::abs(sl2c_isotropic_constant(l0, beta) - 1.0 / 3.0), 1e-15);
    const double t_blow = blow_up_time(l0, beta);
    tally.at_most(tag + "T_error", std::abs(t_blow - exact_t), 1e-15);

    const HermitianMetric g0(l0 * Matrix3c::Identity());
    const auto window = integrate(FlowState{0.0, g0}, c, params, adaptive(0.9 * t_blow));
    tally.require(tag + "window_completed", window.termination == Termination::ReachedHorizon);
    for (const auto& s : window.samples) {
      const double ref = sl2c_isotropic_oracle(l0, beta, s.state.t);
      tally.at_most(tag + "closed_form_rel_error", max_entry(s.state.g.matrix() - ref * Matrix3c::Identity()) / ref,
                    1e-6);
    }
    const auto full = integrate(FlowState{0.0, g0}, c, params, adaptive(2.0 * t_blow));
    const Termination want = l0 > 2.0 * beta ? Termination::BlowUp : Termination::Degenerate;
    tally.require(tag + (l0 > 2.0 * beta ? "BlowUp_event" : "Degenerate_event"), full.termination == want);
    tally.at_most(tag + "event_time_rel_error", std::abs(full.final_sample().state.t - t_blow) / t_blow, 0.01);
  }
}

// 8: sl2c invariant sets on diagonal metrics, beta = 1/2 (2 beta = 1)
void sl2c_invariant_sets(std::mt19937_64& rng, Tally& tally) {
  const ConnectionParams params(1.0, 1.0);
  const auto c = catalog(GroupKind::SL2C);
  std::uniform_real_distribution<double> below(0.2, 0.95), above(1.05, 3.0), any(0.3, 3.0);
  for (int i = 0; i < 20; ++i) {
    std::array<double, 3> l{};
    for (double& x : l) x = i % 3 == 0 ? below(rng) : i % 3 == 1 ? above(rng) : any(rng);
    std::sort(l.begin(), l.end(), std::greater<>());
    const auto traj = integrate(FlowState{0.0, HermitianMetric::diagonal(l[0], l[1], l[2])}, c, params, adaptive(1.0));
    tally.require("no_step_underflow", traj.termination != Termination::StepUnderflow);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      const auto& g = traj.samples[k].state.g;
      const double l1 = g(0, 0).real(), l2 = g(1, 1).real(), l3 = g(2, 2).real();
      tally.at_most("offdiag", monitor(traj.samples[k], "offdiag_max"), 1e-12);
      tally.require("ordering_preserved", l1 >= l2 && l2 >= l3);
      if (k == 0) continue;
      const auto& prev = traj.samples[k - 1].state.g;
      if (l[0] < 1.0) tally.require("lambda1_decreasing_below_2beta", l1 < prev(0, 0).real());
      if (l[2] > 1.0) tally.require("lambda3_increasing_above_2beta", l3 > prev(2, 2).real());
    }
  }
  for (int i = 0; i < 10; ++i) {
    const double x = any(rng), y = any(rng);
    const std::array<double, 3> l = i % 2 == 0 ? std::array<double, 3>{x, x, y} : std::array<double, 3>{x, y, y};
    const auto traj = integrate(FlowState{0.0, HermitianMetric::diagonal(l[0], l[1], l[2])}, c, params, adaptive(0.5));
    for (const auto& s : traj.samples) {
      const auto& g = s.state.g;
      const double gap = i % 2 == 0 ? std::abs(g(0, 0).real() - g(1, 1).real()) : std::abs(g(1, 1).real() - g(2, 2).real());
      tally.at_most("equal_pair_gap", gap, 1e-9);
    }
  }
}

// 9: algebra and the balanced condition
void algebra_suite(std::mt19937_64& rng, Tally& tally) {
  for (auto kind : kAllKinds) {
    const auto c = catalog(kind);
    tally.at_most("catalog_antisymmetry", c.antisymmetry_defect(), 1e-14);
    tally.at_most("catalog_jacobi", jacobi_residual(c), 1e-14);
    tally.require("catalog_unimodular", is_unimodular(c, 1e-14));
  }
  Tensor3 t;
  t(0, 0, 1) = 1.0;
  t(0, 1, 0) = -1.0;
  const StructureConstants non_uni(t);
  for (int trial = 0; trial < 50; ++trial) {
    const BasisChange p = random_basis_change(rng, 1e3);
    for (auto kind : kAllKinds) {
      const auto k = transform_structure_constants(catalog(kind), p);
      tally.at_most("transformed_jacobi", jacobi_residual(k), 1e-10);
      tally.at_most("transformed_unimodularity_defect", unimodularity_defect(k), 1e-10);
    }
    const auto k = transform_structure_constants(non_uni, p);
    tally.at_most("transformed_jacobi", jacobi_residual(k), 1e-10);
    tally.require("non_unimodular_verdict_kept", !is_unimodular(k, 1e-10));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_metric(rng);
    for (auto kind : kAllKinds) tally.at_most("balanced_d_omega_squared", del_omega_squared(catalog(kind), g).max_abs(), 1e-12);
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(std::mt19937_64&, Tally&)> body;
};

const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> list = {
      {1, "curvature identities", curvature_suite},
      {2, "rhs against the reduced case systems", rhs_ground_truth},
      {3, "flow and anomaly form consistency", form_consistency},
      {4, "nilpotent dynamics", [](std::mt19937_64&, Tally& t) { nilpotent_dynamics(t); }},
      {5, "solvable dynamics", solvable_dynamics},
      {6, "sl2c stationary point and spectrum", sl2c_stationary},
      {7, "sl2c isotropic line", [](std::mt19937_64&, Tally& t) { sl2c_isotropic(t); }},
      {8, "sl2c invariant sets", sl2c_invariant_sets},
      {9, "algebra and balanced metrics", algebra_suite},
  };
  return list;
}

}  // namespace

std::vector<int> criteria_for(VerifyLevel level) {
  if (level == VerifyLevel::Fast) return {1, 2, 3, 9};
  return {1, 2, 3, 4, 5, 6, 7, 8, 9};
}

std::vector<CriterionResult> run_verification(const VerifyOptions& options) {
  const auto ids = criteria_for(options.level);
  std::vector<CriterionResult> out;
  for (const auto& crit : all_criteria()) {
    if (std::find(ids.begin(), ids.end(), crit.id) == ids.end()) continue;
    if (!options.only.empty() && !options.only.count(crit.id)) continue;
    CriterionResult r;
    r.id = crit.id;
    r.title = crit.title;
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(crit.id));
    Tally tally;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.body(rng, tally);
      r.passed = tally.passed();
      r.detail = tally.detail();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = tally.detail() + "; aborted: " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os.precision(3);
  os << "criterion " << r.id << " [" << (r.passed ? "PASS" : "FAIL") << "] " << r.title << " (" << r.seconds
     << " s): " << r.detail;
  return os.str();
}

}  // namespace anomaly
