#pragma once

// Command implementations behind the anomaly_flow executable. Each returns
// the process exit code and reports through the given streams.

#include "anomaly/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace anomaly::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitDynamical = 2,  ///< BlowUp, Degenerate, StepUnderflow, Newton without convergence
  kExitVerifyFailed = 3,
};

inline constexpr const char* kOutDirVariable = "ANOMALY_FLOW_OUT_DIR";

struct Context {
  std::filesystem::path out_dir = ".";
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

/// Explicit flag, then $ANOMALY_FLOW_OUT_DIR, then the working directory.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag);

int cmd_run(const std::filesystem::path& scenario_file, const Context& ctx);
int cmd_stationary(const std::filesystem::path& scenario_file, const Context& ctx);
int cmd_linearize(const std::filesystem::path& scenario_file, const Context& ctx);
int cmd_verify(VerifyLevel level, std::uint64_t seed, const Context& ctx);
/// workers == 0 uses the available hardware parallelism.
int cmd_sweep(const std::filesystem::path& sweep_file, const Context& ctx, unsigned workers = 0);

}  // namespace anomaly::cli
