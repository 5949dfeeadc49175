#include "anomaly/io.hpp"

#include "anomaly/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace anomaly::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InvalidConfig((where.empty() ? std::string("/") : where) + ": " + what);
}

std::string join(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string join(const std::string& where, std::size_t index) { return where + "/" + std::to_string(index); }

double real_value(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

std::int64_t integer_value(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::string string_value(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

// Object reader that tracks consumed keys so leftovers can be reported.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(where_, "expected an object");
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const json* v = take(key);
    if (!v) fail(where_, "missing required key \"" + key + "\"");
    return *v;
  }
  std::string path(const std::string& key) const { return join(where_, key); }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) out = real_value(*v, path(key));
  }
  void positive_integer(const std::string& key, std::size_t& out) {
    if (const json* v = take(key)) {
      const auto n = integer_value(*v, path(key));
      if (n <= 0) fail(path(key), "expected a positive integer");
      out = static_cast<std::size_t>(n);
    }
  }
  void positive_integer(const std::string& key, int& out) {
    std::size_t n = static_cast<std::size_t>(std::max(out, 1));
    positive_integer(key, n);
    out = static_cast<int>(n);
  }
  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) out = string_value(*v, path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(join(where_, it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Complex complex_value(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(real_value(j, where), 0.0);
  Fields f(j, where);
  double re = real_value(f.require("re"), f.path("re"));
  double im = 0.0;
  f.number("im", im);
  f.finish();
  return Complex(re, im);
}

Scenario parse_scenario_body(const json& j, const std::string& where, bool top_level) {
  Fields f(j, where);
  Scenario s;
  if (top_level) {
    const json& v = f.require("schema_version");
    if (integer_value(v, f.path("schema_version")) != kSchemaVersion)
      fail(f.path("schema_version"), "unsupported schema version (expected 1)");
  }
  f.text("name", s.name);
  s.constants = structure_constants_from_json(f.require("group"), f.path("group"));
  s.kind = identify_kind(s.constants);
  s.initial_metric = metric_from_json(f.require("initial_metric"), f.path("initial_metric"));
  s.kappa = real_value(f.require("kappa"), f.path("kappa"));
  s.alpha_prime = real_value(f.require("alpha_prime"), f.path("alpha_prime"));

  if (const json* v = f.take("integrator")) {
    Fields g(*v, f.path("integrator"));
    if (const json* x = g.take("scheme")) {
      const auto name = string_value(*x, g.path("scheme"));
      const auto scheme = parse_scheme(name);
      if (!scheme) fail(g.path("scheme"), "unknown scheme \"" + name + "\" (rk4, rkf45)");
      s.integrator.scheme = *scheme;
    }
    if (const json* x = g.take("direction")) {
      const auto name = string_value(*x, g.path("direction"));
      const auto dir = parse_direction(name);
      if (!dir) fail(g.path("direction"), "unknown direction \"" + name + "\" (forward, backward)");
      s.integrator.direction = *dir;
    }
    g.number("dt", s.integrator.dt);
    g.number("rel_tol", s.integrator.rel_tol);
    g.number("abs_tol", s.integrator.abs_tol);
    g.number("t_max", s.integrator.t_max);
    g.positive_integer("max_steps", s.integrator.max_steps);
    g.finish();
  }
  if (const json* v = f.take("events")) {
    Fields g(*v, f.path("events"));
    g.number("stationary_tol", s.integrator.stationary_tol);
    g.number("blow_up_cap", s.integrator.blow_up_cap);
    g.number("degeneracy_floor", s.integrator.degeneracy_floor);
    g.number("dt_min", s.integrator.dt_min);
    g.finish();
  }
  try {
    s.integrator.validate();
  } catch (const InvalidConfig& e) {
    fail(where.empty() ? "/integrator" : where, e.what());
  }
  if (const json* v = f.take("outputs")) {
    Fields g(*v, f.path("outputs"));
    g.text("csv_path", s.outputs.csv_path);
    g.text("json_path", s.outputs.json_path);
    g.positive_integer("sample_stride", s.outputs.sample_stride);
    g.finish();
  }
  if (const json* v = f.take("newton")) {
    Fields g(*v, f.path("newton"));
    g.positive_integer("max_iter", s.newton.max_iter);
    g.number("tol", s.newton.tol);
    g.number("step_tol", s.newton.step_tol);
    g.positive_integer("max_halvings", s.newton.max_halvings);
    g.number("min_eigenvalue", s.newton.min_eigenvalue);
    g.finish();
    if (!(s.newton.tol > 0.0)) fail(g.path("tol"), "must be positive");
  }
  f.finish();
  return s;
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real_value(j[i], join(where, i)));
  return out;
}

}  // namespace

json complex_to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json structure_constants_to_json(const StructureConstants& c) {
  json out = json::object();
  if (const auto kind = identify_kind(c)) out["kind"] = to_string(*kind);
  json entries = json::array();
  for (int d = 0; d < 3; ++d)
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        const Complex z = c(d, a, b);
        if (z == Complex(0.0, 0.0)) continue;
        entries.push_back({{"d", d + 1}, {"a", a + 1}, {"b", b + 1}, {"re", z.real()}, {"im", z.imag()}});
      }
  out["entries"] = entries;
  return out;
}

StructureConstants structure_constants_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    const auto kind = parse_group_kind(name);
    if (!kind) fail(where, "unknown group \"" + name + "\" (abelian, nilpotent, solvable, sl2c)");
    return catalog(*kind);
  }
  Fields f(j, where);
  std::optional<GroupKind> named;
  if (const json* v = f.take("kind")) {
    const auto name = string_value(*v, f.path("kind"));
    named = parse_group_kind(name);
    if (!named) fail(f.path("kind"), "unknown group \"" + name + "\"");
  }
  const json* entries = f.take("entries");
  f.finish();
  if (!entries) {
    if (!named) fail(where, "expected \"kind\" or \"entries\"");
    return catalog(*named);
  }
  if (!entries->is_array()) fail(f.path("entries"), "expected an array");

  std::map<std::tuple<int, int, int>, Complex> given;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string at = join(f.path("entries"), i);
    Fields e((*entries)[i], at);
    int idx[3];
    const char* names[] = {"d", "a", "b"};
    for (int k = 0; k < 3; ++k) {
      const auto n = integer_value(e.require(names[k]), e.path(names[k]));
      if (n < 1 || n > 3) fail(e.path(names[k]), "index must be 1, 2 or 3");
      idx[k] = static_cast<int>(n) - 1;
    }
    const double re = real_value(e.require("re"), e.path("re"));
    double im = 0.0;
    e.number("im", im);
    e.finish();
    if (!given.emplace(std::tuple{idx[0], idx[1], idx[2]}, Complex(re, im)).second) fail(at, "duplicate entry");
  }
  Tensor3 raw;
  for (const auto& [key, z] : given) {
    const auto [d, a, b] = key;
    raw(d, a, b) = z;
    if (!given.count({d, b, a})) raw(d, b, a) = -z;
  }
  StructureConstants c(raw);
  if (!c.input_was_antisymmetric()) fail(f.path("entries"), "entries are not antisymmetric in (a, b)");
  if (jacobi_residual(c) > 1e-10) fail(f.path("entries"), "entries violate the Jacobi identity");
  if (named && identify_kind(c) != named)
    fail(f.path("kind"), "entries do not match the catalog constants of \"" + to_string(*named) + "\"");
  return c;
}

json matrix_to_json(const Matrix3c& m) {
  json rows = json::array();
  for (int a = 0; a < 3; ++a) {
    json row = json::array();
    for (int b = 0; b < 3; ++b) row.push_back(complex_to_json(m(a, b)));
    rows.push_back(row);
  }
  return rows;
}

json metric_to_json(const HermitianMetric& g) { return matrix_to_json(g.matrix()); }

HermitianMetric metric_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected a 3x3 array");
  Matrix3c m;
  for (std::size_t a = 0; a < 3; ++a) {
    const std::string row = join(where, a);
    if (!j[a].is_array() || j[a].size() != 3) fail(row, "expected a row of 3 entries");
    for (std::size_t b = 0; b < 3; ++b) m(a, b) = complex_value(j[a][b], join(row, b));
  }
  try {
    return HermitianMetric(m);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

json four_form_to_json(const FourForm22& f, double drop_below) {
  json entries = json::array();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          const Complex z = f(a, b, c, d);
          if (std::abs(z) <= drop_below) continue;
          entries.push_back(
              {{"a", a + 1}, {"b", b + 1}, {"c", c + 1}, {"d", d + 1}, {"re", z.real()}, {"im", z.imag()}});
        }
  return json{{"entries", entries}};
}

json stationary_report_to_json(const StationaryReport& r) {
  const auto& e = r.metric.eigenvalues();
  return json{{"metric", metric_to_json(r.metric)},
              {"metric_eigenvalues", {e(0), e(1), e(2)}},
              {"rhs_norm", r.rhs_norm},
              {"classification", to_string(r.classification)},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"message", r.message},
              {"warnings", r.warnings}};
}

json spectrum_report_to_json(const SpectrumReport& r) {
  json eigs = json::array();
  for (const auto& z : r.eigenvalues) eigs.push_back(complex_to_json(z));
  json rows = json::array();
  for (int i = 0; i < 9; ++i) {
    json row = json::array();
    for (int k = 0; k < 9; ++k) row.push_back(r.jacobian(i, k));
    rows.push_back(row);
  }
  json names = json::array();
  for (auto n : kCoordinateNames) names.push_back(std::string(n));
  return json{{"coordinates", names},
              {"jacobian", rows},
              {"eigenvalues", eigs},
              {"stability", to_string(r.stability)},
              {"max_real_part", r.max_real_part},
              {"rhs_norm", r.rhs_norm}};
}

Scenario parse_scenario(const json& j, const std::string& where) { return parse_scenario_body(j, where, true); }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(path.string() + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n');
    const auto last_nl = text.rfind('\n', at == 0 ? 0 : at - 1);
    const std::size_t column = last_nl == std::string::npos || at == 0 ? at + 1 : at - last_nl;
    throw InvalidConfig(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                        ": invalid JSON: " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    Scenario s = parse_scenario(j);
    if (s.name.empty()) s.name = path.stem().string();
    return s;
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

Sweep parse_sweep(const json& j) {
  Fields f(j, "");
  Sweep sweep;
  if (integer_value(f.require("schema_version"), "/schema_version") != kSchemaVersion)
    fail("/schema_version", "unsupported schema version (expected 1)");
  f.text("name", sweep.name);
  sweep.base = parse_scenario_body(f.require("base"), "/base", false);
  if (const json* v = f.take("outputs")) {
    Fields g(*v, "/outputs");
    g.text("csv_path", sweep.csv_path);
    g.finish();
  }

  Fields grid(f.require("grid"), "/grid");
  std::vector<std::array<double, 3>> diagonals;
  std::vector<double> multiples, kappas, alpha_primes, betas;
  if (const json* v = grid.take("initial_diagonals")) {
    if (!v->is_array() || v->empty()) fail(grid.path("initial_diagonals"), "expected a non-empty array of triples");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto at = join(grid.path("initial_diagonals"), i);
      const auto triple = number_list((*v)[i], at);
      if (triple.size() != 3) fail(at, "expected 3 numbers");
      diagonals.push_back({triple[0], triple[1], triple[2]});
    }
  }
  if (const json* v = grid.take("isotropic_multiples")) multiples = number_list(*v, grid.path("isotropic_multiples"));
  if (const json* v = grid.take("kappa")) kappas = number_list(*v, grid.path("kappa"));
  if (const json* v = grid.take("alpha_prime")) alpha_primes = number_list(*v, grid.path("alpha_prime"));
  if (const json* v = grid.take("beta")) betas = number_list(*v, grid.path("beta"));
  grid.finish();
  f.finish();

  if (!diagonals.empty() && !multiples.empty())
    fail("/grid", "initial_diagonals and isotropic_multiples cannot be combined");
  if (!alpha_primes.empty() && !betas.empty()) fail("/grid", "alpha_prime and beta cannot be combined");
  if (diagonals.empty() && multiples.empty() && kappas.empty() && alpha_primes.empty() && betas.empty())
    fail("/grid", "no sweep axis given");
  if (sweep.name.empty()) sweep.name = sweep.base.name.empty() ? "sweep" : sweep.base.name;

  sweep.axis_columns = {"kappa", "alpha_prime", "beta", "initial_g11", "initial_g22", "initial_g33"};
  if (!multiples.empty()) sweep.axis_columns.push_back("isotropic_multiple");

  if (kappas.empty()) kappas = {sweep.base.kappa};
  const bool by_beta = !betas.empty();
  std::vector<double> couplings = by_beta ? betas : alpha_primes;
  if (couplings.empty()) couplings = {sweep.base.alpha_prime};
  const std::size_t metric_count = std::max<std::size_t>({diagonals.size(), multiples.size(), 1});

  for (double kappa : kappas)
    for (double coupling : couplings)
      for (std::size_t m = 0; m < metric_count; ++m) {
        SweepCell cell;
        cell.index = sweep.cells.size();
        Scenario s = sweep.base;
        s.kappa = kappa;
        s.name = sweep.name + "_" + std::to_string(cell.index);
        const double tau = ConnectionParams(kappa, 1.0).tau();
        double beta = std::nan("");
                std::array<double, 3> diag{std::nan(""), std::nan(""), std::nan("")};
        try {
          if (by_beta) {
            if (tau == 0.0) throw InvalidConfig("tau vanishes at this kappa, beta cannot be prescribed");
            s.alpha_prime = 4.0 * coupling / tau;
          } else {
            s.alpha_prime = coupling;
          }
          beta = s.params().beta();
          if (!diagonals.empty()) {
            s.initial_metric = HermitianMetric::diagonal(diagonals[m][0], diagonals[m][1], diagonals[m][2]);
          } else if (!multiples.empty()) {
            const double multiple = multiples[m];
            if (!(beta > 0.0)) throw InvalidConfig("isotropic multiples need beta > 0");
            const double l0 = multiple * 2.0 * beta;
            s.initial_metric = HermitianMetric::diagonal(l0, l0, l0);
          }
          for (int k = 0; k < 3; ++k) diag[k] = s.initial_metric(k, k).real();
          cell.scenario = s;
        } catch (const Error& e) {
          cell.error = e.what();
          if (!diagonals.empty()) diag = diagonals[m];
        }
        cell.coordinates = {{"kappa", kappa},
                            {"alpha_prime", s.alpha_prime},
                            {"beta", beta},
                            {"initial_g11", diag[0]},
                            {"initial_g22", diag[1]},
                            {"initial_g33", diag[2]}};
        if (!multiples.empty()) cell.coordinates.emplace_back("isotropic_multiple", multiples[m]);
        sweep.cells.push_back(std::move(cell));
      }
  return sweep;
}

Sweep load_sweep(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    Sweep s = parse_sweep(j);
    if (!j.contains("name")) s.name = path.stem().string();
    return s;
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_columns(const Trajectory& traj) {
  std::vector<std::string> cols{"t"};
  for (auto n : kCoordinateNames) cols.emplace_back(n);
  cols.insert(cols.end(), {"det_g", "omega_norm", "rhs_norm"});
  if (!traj.samples.empty())
    for (const auto& [name, value] : traj.samples.front().monitors.extras) cols.push_back(name);
  return cols;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t sample_stride) {
  const auto cols = trajectory_columns(traj);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  const std::size_t stride = std::max<std::size_t>(sample_stride, 1);
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    if (k % stride != 0 && k + 1 != traj.samples.size()) continue;
    const Sample& s = traj.samples[k];
    os << format_double(s.state.t);
    const Vector9d y = to_coordinates(s.state.g.matrix());
    for (int i = 0; i < 9; ++i) os << "," << format_double(y(i));
    os << "," << format_double(s.monitors.det_g) << "," << format_double(s.monitors.omega_norm) << ","
       << format_double(s.monitors.rhs_norm);
    for (const auto& [name, value] : s.monitors.extras) os << "," << format_double(value);
    os << "\n";
  }
}

json run_summary(const Scenario& scenario, const Trajectory& traj, double wall_seconds) {
  const ConnectionParams params = scenario.params();
  json out;
  out["name"] = scenario.name;
  out["group"] = scenario.kind ? to_string(*scenario.kind) : "custom";
  out["kappa"] = scenario.kappa;
  out["alpha_prime"] = scenario.alpha_prime;
  out["tau"] = params.tau();
  out["beta"] = params.beta();
  out["scheme"] = to_string(scenario.integrator.scheme);
  out["direction"] = to_string(scenario.integrator.direction);
  out["t_max"] = scenario.integrator.t_max;
  out["termination"] = to_string(traj.termination);
  out["note"] = traj.note;
  out["samples"] = traj.samples.size();

  const Sample& first = traj.samples.front();
  const Sample& last = traj.final_sample();
  out["final"] = {{"t", last.state.t},
                  {"metric", metric_to_json(last.state.g)},
                  {"det_g", last.monitors.det_g},
                  {"omega_norm", last.monitors.omega_norm},
                  {"rhs_norm", last.monitors.rhs_norm}};

  auto values = [](const MonitorRecord& m) {
    std::vector<std::pair<std::string, double>> v{
        {"det_g", m.det_g}, {"omega_norm", m.omega_norm}, {"rhs_norm", m.rhs_norm}};
    v.insert(v.end(), m.extras.begin(), m.extras.end());
    return v;
  };
  const auto initial = values(first.monitors);
  std::vector<double> lo, hi, change;
  for (const auto& [name, v] : initial) {
    lo.push_back(v);
    hi.push_back(v);
    change.push_back(0.0);
  }
  for (const auto& s : traj.samples) {
    const auto now = values(s.monitors);
    for (std::size_t i = 0; i < now.size() && i < initial.size(); ++i) {
      lo[i] = std::min(lo[i], now[i].second);
      hi[i] = std::max(hi[i], now[i].second);
      change[i] = std::max(change[i], std::abs(now[i].second - initial[i].second));
    }
  }
  const auto final_values = values(last.monitors);
  json mon = json::object();
  for (std::size_t i = 0; i < initial.size(); ++i)
    mon[initial[i].first] = {{"initial", initial[i].second},
                             {"final", final_values[i].second},
                             {"min", lo[i]},
                             {"max", hi[i]},
                             {"max_abs_change", change[i]}};
  out["monitors"] = mon;

  out["stats"] = {{"accepted_steps", traj.stats.accepted_steps},
                  {"rejected_steps", traj.stats.rejected_steps},
                  {"rhs_evaluations", traj.stats.rhs_evaluations},
                  {"min_dt", traj.stats.min_dt},
                  {"max_dt", traj.stats.max_dt},
                  {"max_hermiticity_defect", traj.stats.max_hermiticity_defect}};
  out["wall_clock_seconds"] = wall_seconds;

  // isotropic sl2c data has the closed-form solution
  const Matrix3c& g0 = first.state.g.matrix();
  const double l0 = g0(0, 0).real();
  const bool isotropic = (g0 - l0 * Matrix3c::Identity()).cwiseAbs().maxCoeff() <= 1e-14 * l0;
  const double beta = params.beta();
  if (scenario.kind == GroupKind::SL2C && isotropic && beta > 0.0) {
    json oracle;
    const double c = sl2c_isotropic_constant(l0, beta);
    oracle["lambda0"] = l0;
    oracle["C"] = c;
    double max_rel = 0.0;
    std::optional<double> t_blow;
    if (c > 0.0) t_blow = blow_up_time(l0, beta);
    oracle["T"] = t_blow ? json(*t_blow) : json(nullptr);
    for (const auto& s : traj.samples) {
      if (t_blow && s.state.t > 0.9 * *t_blow) continue;
      try {
        const double ref = sl2c_isotropic_oracle(l0, beta, s.state.t);
        max_rel = std::max(max_rel, (s.state.g.matrix() - ref * Matrix3c::Identity()).cwiseAbs().maxCoeff() / ref);
      } catch (const DomainError&) {
      }
    }
    oracle["max_rel_error_vs_closed_form"] = max_rel;
    if (t_blow && (traj.termination == Termination::BlowUp || traj.termination == Termination::Degenerate)) {
      oracle["event_time"] = last.state.t;
      oracle["event_time_rel_error"] = std::abs(last.state.t - *t_blow) / *t_blow;
    }
    out["sl2c_isotropic_oracle"] = oracle;
  }
  return out;
}

}  // namespace anomaly::io
