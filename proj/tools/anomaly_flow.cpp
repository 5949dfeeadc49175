// anomaly_flow: run, stationary, linearize, verify, sweep.

#include "anomaly/cli.hpp"
#include "anomaly/curvature.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  using namespace anomaly;
  CLI::App app{"Anomaly flow on 3-dimensional unimodular complex Lie groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "anomaly_flow 1.0");

  std::string file;
  std::optional<std::string> out_dir;
  std::string level = "fast";
  std::uint64_t seed = VerifyOptions{}.seed;
  unsigned workers = 0;
  std::string mutation = "none";

  auto with_file = [&](CLI::App* sub, const char* what) {
    sub->add_option("file", file, what)->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, std::string("Output directory (default $") + cli::kOutDirVariable + " or .)");
  };
  auto* run = app.add_subcommand("run", "Integrate a scenario; writes a CSV trajectory and a JSON summary");
  with_file(run, "Scenario JSON file");
  auto* stationary = app.add_subcommand("stationary", "Newton search for a stationary metric from the scenario metric");
  with_file(stationary, "Scenario JSON file");
  auto* lin = app.add_subcommand("linearize", "Jacobian spectrum at the scenario metric");
  with_file(lin, "Scenario JSON file");
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid concurrently; writes one summary row per cell");
  with_file(sweep, "Sweep JSON file");
  sweep->add_option("--workers", workers, "Worker threads (default: hardware parallelism)");

  auto* verify = app.add_subcommand("verify", "Run the acceptance checks and print one line per criterion");
  verify->add_option("level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--seed", seed, "Seed for the randomized checks");
  verify->add_option("--out-dir", out_dir, "Output directory for verify_<level>.json");
  const std::map<std::string, TauMutation> mutations = {
      {"none", TauMutation::None}, {"negated", TauMutation::Negated}, {"inner-sign", TauMutation::InnerSignFlipped}};
  verify->add_option("--mutate-tau", mutation)->check(CLI::IsMember({"none", "negated", "inner-sign"}))->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInputError;
  }

  cli::Context ctx;
  ctx.out_dir = cli::resolve_out_dir(out_dir);
  if (*run) return cli::cmd_run(file, ctx);
  if (*stationary) return cli::cmd_stationary(file, ctx);
  if (*lin) return cli::cmd_linearize(file, ctx);
  if (*sweep) return cli::cmd_sweep(file, ctx, workers);
  set_tau_mutation(mutations.at(mutation));
  return cli::cmd_verify(level == "full" ? VerifyLevel::Full : VerifyLevel::Fast, seed, ctx);
}
