#include "anomaly/flow.hpp"

#include "anomaly/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace anomaly {

namespace {

constexpr std::array<std::pair<int, int>, 3> kOffDiagonal = {{{0, 1}, {0, 2}, {1, 2}}};

double relative_drift(double x, double x0) { return x0 != 0.0 ? std::abs(x / x0 - 1.0) : std::abs(x); }

double offdiag_max(const Matrix3c& g) {
  double m = 0.0;
  for (auto [i, j] : kOffDiagonal) m = std::max(m, std::abs(g(i, j)));
  return m;
}

bool nearly_equal(double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); }

MonitorRecord base_record(const HermitianMetric& g, double rhs_norm) {
  MonitorRecord r;
  r.det_g = g.det();
  r.omega_norm = omega_norm(g);
  r.rhs_norm = rhs_norm;
  return r;
}

void add_group_monitors(MonitorRecord& r, const HermitianMetric& g, GroupKind group, const HermitianMetric& g0) {
  const Matrix3c& m = g.matrix();
  const Matrix3c& m0 = g0.matrix();
  auto put = [&r](const char* name, double v) { r.extras.emplace_back(name, v); };
  switch (group) {
    case GroupKind::Abelian:
      break;
    case GroupKind::Nilpotent: {
      const double l1 = m(0, 0).real(), l2 = m(1, 1).real(), l3 = m(2, 2).real();
      const double ratio0 = m0(0, 0).real() / m0(1, 1).real();
      put("lambda1", l1);
      put("lambda2", l2);
      put("lambda3", l3);
      put("lambda1_over_lambda2", l1 / l2);
      put("offdiag_max", offdiag_max(m));
      put("drift_lambda3", relative_drift(l3, m0(2, 2).real()));
      put("drift_ratio", relative_drift(l1 / l2, ratio0));
      break;
    }
    case GroupKind::Solvable: {
      auto invariants = [](const HermitianMetric& h) {
        const Matrix3c& x = h.matrix();
        const double lam = x(0, 0).real();
        return std::array<double, 6>{x(1, 1).real() / lam,
                                     std::abs(x(0, 2)) / lam,
                                     std::abs(x(1, 2)) / lam,
                                     lam * lam * h.inverse()(2, 2).real(),
                                     std::abs(x(0, 1)) / lam,
                                     h.inverse()(2, 2).real()};
      };
      const auto now = invariants(g);
      const auto then = invariants(g0);
      static constexpr const char* names[] = {"a", "b", "c", "d", "C"};
      static constexpr const char* drift_names[] = {"drift_a", "drift_b", "drift_c", "drift_d", "drift_C"};
      for (int i = 0; i < 5; ++i) put(names[i], now[i]);
      put("g_inv33", now[5]);
      put("abs_g12", std::abs(m(0, 1)));
      for (int i = 0; i < 5; ++i) put(drift_names[i], relative_drift(now[i], then[i]));
      break;
    }
    case GroupKind::SL2C: {
      const auto& e = g.eigenvalues();
      const double l1 = m(0, 0).real(), l2 = m(1, 1).real(), l3 = m(2, 2).real();
      put("eig_max", e(2));
      put("eig_mid", e(1));
      put("eig_min", e(0));
      put("lambda1", l1);
      put("lambda2", l2);
      put("lambda3", l3);
      put("eq12", nearly_equal(l1, l2) ? 1.0 : 0.0);
      put("eq23", nearly_equal(l2, l3) ? 1.0 : 0.0);
      put("eq13", nearly_equal(l1, l3) ? 1.0 : 0.0);
      put("offdiag_max", offdiag_max(m));
      break;
    }
  }
}

double velocity_norm(const Matrix3c& v) { return (0.5 * (v + v.adjoint())).cwiseAbs().maxCoeff(); }

// Fehlberg 4(5) tableau
constexpr double kA[6][5] = {{0, 0, 0, 0, 0},
                             {1.0 / 4, 0, 0, 0, 0},
                             {3.0 / 32, 9.0 / 32, 0, 0, 0},
                             {1932.0 / 2197, -7200.0 / 2197, 7296.0 / 2197, 0, 0},
                             {439.0 / 216, -8.0, 3680.0 / 513, -845.0 / 4104, 0},
                             {-8.0 / 27, 2.0, -3544.0 / 2565, 1859.0 / 4104, -11.0 / 40}};
constexpr double kB5[6] = {16.0 / 135, 0, 6656.0 / 12825, 28561.0 / 56430, -9.0 / 50, 2.0 / 55};
constexpr double kB4[6] = {25.0 / 216, 0, 1408.0 / 2565, 2197.0 / 4104, -1.0 / 5, 0};

class Integrator {
 public:
  Integrator(const FlowState& initial, const StructureConstants& c, const ConnectionParams& params,
             const IntegratorConfig& config)
      : initial_(initial), c_(c), params_(params), cfg_(config), group_(identify_kind(c)) {
    sign_ = config.direction == Direction::Forward ? 1.0 : -1.0;
  }

  Trajectory run() {
    Trajectory out;
    Vector9d y = to_coordinates(initial_.g.matrix());
    double t = initial_.t;
    const double t_end = t + sign_ * cfg_.t_max;

    Matrix3c v0;
    if (!velocity(initial_.g, v0)) throw DegenerateMetric("velocity is not finite at the initial metric");
    Vector9d k1 = sign_ * to_coordinates(v0);
    double rhs_norm = velocity_norm(v0);
    bool armed = rhs_norm >= cfg_.stationary_tol;
    out.samples.push_back({initial_, record(initial_.g, rhs_norm)});

    if (auto ev = check_state(initial_.g)) {
      out.termination = *ev;
      finish(out);
      return out;
    }

    double h = cfg_.dt;
    std::size_t steps = 0;
    while (true) {
      const double remaining = std::abs(t_end - t);
      if (remaining <= 1e-14 * std::max(1.0, std::abs(t_end))) {
        out.termination = Termination::ReachedHorizon;
        break;
      }
      if (++steps > cfg_.max_steps) {
        out.termination = Termination::StepUnderflow;
        out.note = "step limit reached";
        break;
      }
      const bool last = h >= remaining || remaining - h <= 1e-9 * h;
      const double step = last ? remaining : h;
      if (step < cfg_.dt_min && !last) {
        out.termination = Termination::StepUnderflow;
        out.note = "step size fell below dt_min";
        break;
      }

      Vector9d y_new;
      double err = 0.0;
      bool ok = cfg_.scheme == Scheme::RKF45Adaptive ? rkf45_step(y, k1, step, y_new, err)
                                                     : rk4_step(y, k1, step, y_new);
      std::optional<HermitianMetric> g_new;
      Matrix3c v_new;
      if (ok && err <= 1.0) {
        g_new = make_metric(y_new);
        ok = g_new && velocity(*g_new, v_new);
      }
      if (!ok) {
        ++stats_.rejected_steps;
        h = step * 0.25;
        continue;
      }
      if (err > 1.0) {
        ++stats_.rejected_steps;
        h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        continue;
      }

      ++stats_.accepted_steps;
      stats_.min_dt = stats_.accepted_steps == 1 ? step : std::min(stats_.min_dt, step);
      stats_.max_dt = std::max(stats_.max_dt, step);
      y = y_new;
      t = last ? t_end : t + sign_ * step;
      k1 = sign_ * to_coordinates(v_new);
      rhs_norm = velocity_norm(v_new);

      FlowState state{t, *g_new};
      out.samples.push_back({state, record(*g_new, rhs_norm)});
      if (auto ev = check_state(*g_new)) {
        out.termination = *ev;
        break;
      }
      if (rhs_norm < cfg_.stationary_tol && armed) {
        out.termination = Termination::Stationary;
        break;
      }
      if (rhs_norm >= cfg_.stationary_tol) armed = true;

      if (cfg_.scheme == Scheme::RKF45Adaptive) {
        const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        h = step * factor;
        if (last) h = std::max(h, cfg_.dt);
      } else {
        h = cfg_.dt;
      }
    }
    finish(out);
    return out;
  }

 private:

  std::optional<HermitianMetric> make_metric(const Vector9d& y) const {
    if (!y.allFinite()) return std::nullopt;
    try {
      return HermitianMetric(from_coordinates(y));
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  bool velocity(const HermitianMetric& g, Matrix3c& v) {
    ++stats_.rhs_evaluations;
    v = rhs(g, c_, params_);
    if (!v.allFinite()) return false;
    stats_.max_hermiticity_defect = std::max(stats_.max_hermiticity_defect, (v - v.adjoint()).cwiseAbs().maxCoeff());
    return true;
  }

  bool stage(const Vector9d& y, Vector9d& k) {
    auto g = make_metric(y);
    if (!g) return false;
    Matrix3c v;
    if (!velocity(*g, v)) return false;
    k = sign_ * to_coordinates(v);
    return true;
  }

  bool rkf45_step(const Vector9d& y, const Vector9d& k1, double h, Vector9d& y_new, double& err) {
    std::array<Vector9d, 6> k;
    k[0] = k1;
    for (int s = 1; s < 6; ++s) {
      Vector9d ys = y;
      for (int j = 0; j < s; ++j) ys += h * kA[s][j] * k[j];
      if (!stage(ys, k[s])) return false;
    }
    Vector9d y5 = y, diff = Vector9d::Zero();
    for (int s = 0; s < 6; ++s) {
      y5 += h * kB5[s] * k[s];
      diff += h * (kB5[s] - kB4[s]) * k[s];
    }
    err = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
      err = std::max(err, std::abs(diff(i)) / scale);
    }
    if (!std::isfinite(err)) return false;
    y_new = y5;
    return true;
  }

  bool rk4_step(const Vector9d& y, const Vector9d& k1, double h, Vector9d& y_new) {
    Vector9d k2, k3, k4;
    if (!stage(y + 0.5 * h * k1, k2)) return false;
    if (!stage(y + 0.5 * h * k2, k3)) return false;
    if (!stage(y + h * k3, k4)) return false;
    y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return true;
  }

  std::optional<Termination> check_state(const HermitianMetric& g) const {
    if (g.eigenvalues()(0) < cfg_.degeneracy_floor) return Termination::Degenerate;
    if (g.eigenvalues()(2) > cfg_.blow_up_cap) return Termination::BlowUp;
    return std::nullopt;
  }

  MonitorRecord record(const HermitianMetric& g, double rhs_norm) const {
    MonitorRecord r = base_record(g, rhs_norm);
    if (group_) add_group_monitors(r, g, *group_, initial_.g);
    return r;
  }

  void finish(Trajectory& out) { out.stats = stats_; }

  const FlowState& initial_;
  const StructureConstants& c_;
  const ConnectionParams& params_;
  const IntegratorConfig& cfg_;
  std::optional<GroupKind> group_;
  double sign_ = 1.0;
  IntegrationStats stats_;
};

}  // namespace

Vector9d to_coordinates(const Matrix3c& m) {
  Vector9d y;
  for (int i = 0; i < 3; ++i) y(i) = m(i, i).real();
  int k = 3;
  for (auto [i, j] : kOffDiagonal) {
    const Complex z = 0.5 * (m(i, j) + std::conj(m(j, i)));
    y(k++) = z.real();
    y(k++) = z.imag();
  }
  return y;
}

Matrix3c from_coordinates(const Vector9d& y) {
  Matrix3c m;
  for (int i = 0; i < 3; ++i) m(i, i) = y(i);
  int k = 3;
  for (auto [i, j] : kOffDiagonal) {
    const Complex z(y(k), y(k + 1));
    k += 2;
    m(i, j) = z;
    m(j, i) = std::conj(z);
  }
  return m;
}

Matrix3c rhs(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params) {
  const Matrix3c kernel = anomaly_kernel(c, g, params.beta());
  const Matrix3c& ginv = g.inverse();
  Tensor3 w;  // w[m][b][d] = K[m][s] c^s_{bd}
  for (int m = 0; m < kDim; ++m)
    for (int b = 0; b < kDim; ++b)
      for (int d = 0; d < kDim; ++d)
        for (int s = 0; s < kDim; ++s) w(m, b, d) += kernel(m, s) * c(s, b, d);
  Tensor3 v;  // v[a][m][d] = g^{dp̄} conj(c^m_{ap})
  for (int a = 0; a < kDim; ++a)
    for (int m = 0; m < kDim; ++m)
      for (int d = 0; d < kDim; ++d)
        for (int p = 0; p < kDim; ++p) v(a, m, d) += ginv(d, p) * std::conj(c(m, a, p));
  const double prefactor = 0.5 * std::sqrt(g.det());
  Matrix3c out;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) {
      Complex s{};
      for (int m = 0; m < kDim; ++m)
        for (int d = 0; d < kDim; ++d) s += v(a, m, d) * w(m, b, d);
      out(a, b) = prefactor * s;
    }
  return out;
}

Matrix3c velocity_from_form(const FourForm22& form, const HermitianMetric& g) {
  const Matrix3c& ginv = g.inverse();
  const double prefactor = 2.0 / omega_norm(g);
  Matrix3c out;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) {
      Complex s{};
      for (int d = 0; d < kDim; ++d)
        for (int p = 0; p < kDim; ++p) s += ginv(d, p) * form(a, p, b, d);
      out(a, b) = prefactor * s;
    }
  return out;
}

double flow_form_consistency(const HermitianMetric& g, const StructureConstants& c, const ConnectionParams& params,
                             double h) {
  const Matrix3c v = rhs(g, c, params);
  const Matrix3c vh = 0.5 * (v + v.adjoint());
  const HermitianMetric plus = HermitianMetric::hermitized(g.matrix() + h * vh);
  const HermitianMetric minus = HermitianMetric::hermitized(g.matrix() - h * vh);
  const FourForm22 fd = (0.5 / h) * (conformal_omega_squared(plus) - conformal_omega_squared(minus));
  return max_abs_diff(fd, anomaly_form(c, g, params));
}

std::string to_string(Scheme s) { return s == Scheme::RK4Fixed ? "rk4" : "rkf45"; }
std::string to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedHorizon: return "ReachedHorizon";
    case Termination::Stationary: return "Stationary";
    case Termination::BlowUp: return "BlowUp";
    case Termination::Degenerate: return "Degenerate";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "rk4") return Scheme::RK4Fixed;
  if (name == "rkf45") return Scheme::RKF45Adaptive;
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view name) {
  if (name == "forward") return Direction::Forward;
  if (name == "backward") return Direction::Backward;
  return std::nullopt;
}

void IntegratorConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidConfig(what);
  };
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  require(std::isfinite(rel_tol) && rel_tol > 0.0, "rel_tol must be positive");
  require(std::isfinite(abs_tol) && abs_tol > 0.0, "abs_tol must be positive");
  require(std::isfinite(t_max) && t_max > 0.0, "t_max must be positive");
  require(std::isfinite(stationary_tol) && stationary_tol >= 0.0, "stationary_tol must be non-negative");
  require(blow_up_cap > 0.0, "blow_up_cap must be positive");
  require(degeneracy_floor >= 0.0 && degeneracy_floor < blow_up_cap, "degeneracy_floor must lie in [0, blow_up_cap)");
  require(std::isfinite(dt_min) && dt_min > 0.0 && dt_min <= dt, "dt_min must lie in (0, dt]");
  require(max_steps > 0, "max_steps must be positive");
}

std::optional<double> MonitorRecord::get(std::string_view name) const {
  if (name == "det_g") return det_g;
  if (name == "omega_norm") return omega_norm;
  if (name == "rhs_norm") return rhs_norm;
  for (const auto& [k, v] : extras)
    if (k == name) return v;
  return std::nullopt;
}

bool MonitorRecord::all_finite() const {
  if (!std::isfinite(det_g) || !std::isfinite(omega_norm) || !std::isfinite(rhs_norm)) return false;
  return std::all_of(extras.begin(), extras.end(), [](const auto& kv) { return std::isfinite(kv.second); });
}

MonitorRecord monitors(const FlowState& state, GroupKind group, const FlowState& initial,
                       const ConnectionParams& params) {
  MonitorRecord r = base_record(state.g, velocity_norm(rhs(state.g, catalog(group), params)));
  add_group_monitors(r, state.g, group, initial.g);
  return r;
}

Trajectory integrate(const FlowState& initial, const StructureConstants& c, const ConnectionParams& params,
                     const IntegratorConfig& config) {
  config.validate();
  return Integrator(initial, c, params, config).run();
}

}  // namespace anomaly
