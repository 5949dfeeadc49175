#pragma once

// The acceptance suite: numbered criteria with pinned tolerances, shared by
// the command line front end and the acceptance test binary.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace anomaly {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

enum class VerifyLevel { Fast, Full };

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::Full;
  std::uint64_t seed = 20240917;
  /// Restrict to these criteria when non-empty.
  std::set<int> only;
};

/// Criteria ids run at a level: fast = {1, 2, 3, 9}, full = 1..9.
std::vector<int> criteria_for(VerifyLevel level);

std::vector<CriterionResult> run_verification(const VerifyOptions& options);

/// "criterion N [PASS|FAIL] title: detail"
std::string format_result(const CriterionResult& r);

}  // namespace anomaly
