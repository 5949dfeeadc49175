#include "anomaly/cli.hpp"

#include "anomaly/analysis.hpp"
#include "anomaly/error.hpp"
#include "anomaly/flow.hpp"
#include "anomaly/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

namespace anomaly::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

std::ostream& out(const Context& ctx) { return ctx.out ? *ctx.out : std::cout; }
std::ostream& err(const Context& ctx) { return ctx.err ? *ctx.err : std::cerr; }

fs::path output_path(const Context& ctx, const std::string& configured, const std::string& fallback) {
  fs::path p = configured.empty() ? fs::path(fallback) : fs::path(configured);
  if (p.is_relative()) p = ctx.out_dir / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw InvalidInput(path.string() + ": cannot open for writing");
  os << j.dump(2) << "\n";
}

void warn_coupling(const Context& ctx, const io::Scenario& s) {
  const double coupling = s.alpha_prime * s.params().tau() + 0.0;
  if (coupling <= 0.0)
    err(ctx) << "warning: alpha' tau = " << coupling
             << " <= 0; the stationary and convergence statements assume a positive coupling\n";
}

std::optional<io::Scenario> load(const fs::path& file, const Context& ctx) {
  try {
    return io::load_scenario(file);
  } catch (const Error& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool dynamical_failure(Termination t) {
  return t == Termination::BlowUp || t == Termination::Degenerate || t == Termination::StepUnderflow;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string csv_number(double x) { return std::isnan(x) ? "" : io::format_double(x); }

}  // namespace

fs::path resolve_out_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutDirVariable); env && *env) return env;
  return ".";
}

int cmd_run(const fs::path& scenario_file, const Context& ctx) {
  const auto scenario = load(scenario_file, ctx);
  if (!scenario) return kExitInputError;
  warn_coupling(ctx, *scenario);
  try {
    const auto start = std::chrono::steady_clock::now();
    const Trajectory traj = integrate(FlowState{0.0, scenario->initial_metric}, scenario->constants,
                                      scenario->params(), scenario->integrator);
    const double wall = seconds_since(start);

    const fs::path csv = output_path(ctx, scenario->outputs.csv_path, scenario->name + ".csv");
    std::ofstream os(csv);
    if (!os) throw InvalidInput(csv.string() + ": cannot open for writing");
    io::write_trajectory_csv(os, traj, scenario->outputs.sample_stride);
    os.close();

    json summary = io::run_summary(*scenario, traj, wall);
    summary["csv_path"] = csv.string();
    const fs::path js = output_path(ctx, scenario->outputs.json_path, scenario->name + "_summary.json");
    write_json(js, summary);

    out(ctx) << scenario->name << ": " << to_string(traj.termination) << " at t = " << traj.final_sample().state.t
             << " after " << traj.stats.accepted_steps << " steps";
    if (!traj.note.empty()) out(ctx) << " (" << traj.note << ")";
    out(ctx) << "\n  trajectory: " << csv.string() << "\n  summary:    " << js.string() << "\n";
    if (summary.contains("sl2c_isotropic_oracle")) {
      const auto& o = summary["sl2c_isotropic_oracle"];
      if (o.contains("event_time_rel_error"))
        out(ctx) << "  closed-form T = " << o["T"].get<double>() << ", relative error of the detected event "
                 << o["event_time_rel_error"].get<double>() << "\n";
    }
    return dynamical_failure(traj.termination) ? kExitDynamical : kExitOk;
  } catch (const InvalidInput& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitDynamical;
  }
}

int cmd_stationary(const fs::path& scenario_file, const Context& ctx) {
  const auto scenario = load(scenario_file, ctx);
  if (!scenario) return kExitInputError;
  warn_coupling(ctx, *scenario);
  try {
    const ConnectionParams params = scenario->params();
    const StationaryReport report =
        find_stationary(scenario->constants, params, scenario->initial_metric, scenario->newton);
    json j = io::stationary_report_to_json(report);
    const double beta = params.beta();
    j["name"] = scenario->name;
    j["group"] = scenario->kind ? to_string(*scenario->kind) : "custom";
    j["beta"] = beta;
    if (scenario->kind == GroupKind::Solvable)
      j["classify_solvable_stationary"] = classify_solvable_stationary(report.metric, beta, 1e-8);
    if (scenario->kind == GroupKind::SL2C) {
      j["distance_to_2beta_identity"] = (report.metric.matrix() - 2.0 * beta * Matrix3c::Identity()).norm();
      j["on_stationary_orbit"] = beta > 0.0 && on_sl2c_stationary_orbit(report.metric, beta, 1e-6);
    }
    const fs::path js = output_path(ctx, scenario->outputs.json_path, scenario->name + "_stationary.json");
    write_json(js, j);

    for (const auto& w : report.warnings) err(ctx) << "warning: " << w << "\n";
    out(ctx) << scenario->name << ": " << (report.converged ? "converged" : "not converged") << " after "
             << report.iterations << " iterations, rhs_norm = " << report.rhs_norm
             << ", classification = " << to_string(report.classification) << "\n";
    if (!report.converged && !report.message.empty()) out(ctx) << "  " << report.message << "\n";
    out(ctx) << "  report: " << js.string() << "\n";
    return report.converged ? kExitOk : kExitDynamical;
  } catch (const InvalidInput& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitDynamical;
  }
}

int cmd_linearize(const fs::path& scenario_file, const Context& ctx) {
  const auto scenario = load(scenario_file, ctx);
  if (!scenario) return kExitInputError;
  warn_coupling(ctx, *scenario);
  try {
    const SpectrumReport report = linearize(scenario->initial_metric, scenario->constants, scenario->params());
    if (report.rhs_norm > 1e-6)
      err(ctx) << "warning: rhs_norm = " << report.rhs_norm
               << " > 1e-6, the metric is not stationary and the spectrum describes a moving point\n";
    json j = io::spectrum_report_to_json(report);
    j["name"] = scenario->name;
    j["group"] = scenario->kind ? to_string(*scenario->kind) : "custom";
    j["metric"] = io::metric_to_json(scenario->initial_metric);
    const fs::path js = output_path(ctx, scenario->outputs.json_path, scenario->name + "_spectrum.json");
    write_json(js, j);

    out(ctx) << scenario->name << ": " << to_string(report.stability)
             << ", max real part = " << report.max_real_part << "\n  eigenvalues:";
    for (const auto& z : report.eigenvalues) {
      out(ctx) << " " << z.real();
      if (z.imag() != 0.0) out(ctx) << (z.imag() > 0 ? "+" : "") << z.imag() << "i";
    }
    out(ctx) << "\n  report: " << js.string() << "\n";
    return kExitOk;
  } catch (const InvalidInput& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitDynamical;
  }
}

int cmd_verify(VerifyLevel level, std::uint64_t seed, const Context& ctx) {
  VerifyOptions options;
  options.level = level;
  options.seed = seed;
  const auto results = run_verification(options);
  json rows = json::array();
  std::size_t passed = 0;
  for (const auto& r : results) {
    out(ctx) << format_result(r) << "\n";
    if (r.passed) ++passed;
    rows.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  out(ctx) << passed << "/" << results.size() << " criteria passed\n";
  try {
    const std::string level_name = level == VerifyLevel::Fast ? "fast" : "full";
    const fs::path js = output_path(ctx, "", "verify_" + level_name + ".json");
    write_json(js, json{{"level", level_name}, {"seed", seed}, {"criteria", rows}});
  } catch (const std::exception& e) {
    err(ctx) << "warning: " << e.what() << "\n";
  }
  return passed == results.size() ? kExitOk : kExitVerifyFailed;
}

int cmd_sweep(const fs::path& sweep_file, const Context& ctx, unsigned workers) {
  io::Sweep sweep;
  try {
    sweep = io::load_sweep(sweep_file);
  } catch (const Error& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  warn_coupling(ctx, sweep.base);

  struct CellResult {
    bool ok = false;
    std::string error;
    Termination termination = Termination::ReachedHorizon;
    double t_final = std::nan("");
    std::size_t steps = 0;
    MonitorRecord final_monitors;
    double oracle_t = std::nan("");
    double oracle_rel_error = std::nan("");
  };
  std::vector<CellResult> results(sweep.cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sweep.cells.size(); i = next++) {
      const auto& cell = sweep.cells[i];
      CellResult& r = results[i];
      if (!cell.scenario) {
        r.error = cell.error;
        continue;
      }
      try {
        const auto& s = *cell.scenario;
        const Trajectory traj = integrate(FlowState{0.0, s.initial_metric}, s.constants, s.params(), s.integrator);
        r.ok = true;
        r.termination = traj.termination;
        r.t_final = traj.final_sample().state.t;
        r.steps = traj.stats.accepted_steps;
        r.final_monitors = traj.final_sample().monitors;
        const json summary = io::run_summary(s, traj, 0.0);
        if (summary.contains("sl2c_isotropic_oracle")) {
          const auto& o = summary["sl2c_isotropic_oracle"];
          if (o["T"].is_number()) r.oracle_t = o["T"].get<double>();
          if (o.contains("event_time_rel_error")) r.oracle_rel_error = o["event_time_rel_error"].get<double>();
        }
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const unsigned pool = std::max(1u, std::min<unsigned>(workers ? workers : std::thread::hardware_concurrency(),
                                                         static_cast<unsigned>(sweep.cells.size())));
  std::vector<std::thread> threads;
  for (unsigned k = 0; k < pool; ++k) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::vector<std::string> monitor_names;
  for (const auto& r : results)
    if (r.ok) {
      for (const auto& [name, v] : r.final_monitors.extras) monitor_names.push_back(name);
      break;
    }

  try {
    const fs::path csv = output_path(ctx, sweep.csv_path, sweep.name + "_sweep.csv");
    std::ofstream os(csv);
    if (!os) throw InvalidInput(csv.string() + ": cannot open for writing");
    os << "cell";
    for (const auto& c : sweep.axis_columns) os << "," << c;
    os << ",termination,t_final,event_time,accepted_steps,det_g,omega_norm,rhs_norm";
    for (const auto& m : monitor_names) os << "," << m;
    os << ",oracle_T,event_time_rel_error,error\n";
    std::size_t failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      os << i;
      for (const auto& [name, v] : sweep.cells[i].coordinates) os << "," << csv_number(v);
      if (r.ok) {
        const bool event = r.termination == Termination::BlowUp || r.termination == Termination::Degenerate;
        os << "," << to_string(r.termination) << "," << csv_number(r.t_final) << ","
           << (event ? csv_number(r.t_final) : "") << "," << r.steps << "," << csv_number(r.final_monitors.det_g)
           << "," << csv_number(r.final_monitors.omega_norm) << "," << csv_number(r.final_monitors.rhs_norm);
        for (const auto& m : monitor_names) {
          const auto v = r.final_monitors.get(m);
          os << "," << (v ? csv_number(*v) : "");
        }
      } else {
        ++failed;
        os << ",error,,,,,,";
        for (std::size_t k = 0; k < monitor_names.size(); ++k) os << ",";
      }
      os << "," << csv_number(r.oracle_t) << "," << csv_number(r.oracle_rel_error) << "," << csv_field(r.error)
         << "\n";
    }
    out(ctx) << sweep.name << ": " << results.size() << " cells on " << pool << " workers, " << failed
             << " failed\n  table: " << csv.string() << "\n";
  } catch (const std::exception& e) {
    err(ctx) << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace anomaly::cli
