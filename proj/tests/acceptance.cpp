// Acceptance suite: one line per criterion.
//
// Criteria listed in kKnownFailures are implemented as stated and fail for
// reasons recorded in the project notes. The binary exits non-zero if any
// other criterion fails or if a known failure starts passing.

#include "anomaly/verify.hpp"

#include <cstdlib>
#include <iostream>
#include <set>

int main(int argc, char** argv) {
  const std::set<int> kKnownFailures = {2, 5, 6};
  anomaly::VerifyOptions options;
  options.level = anomaly::VerifyLevel::Full;
  if (argc > 1) options.seed = std::strtoull(argv[1], nullptr, 10);

  int unexpected = 0, passed = 0;
  const auto results = anomaly::run_verification(options);
  for (const auto& r : results) {
    std::cout << anomaly::format_result(r) << "\n";
    if (r.passed) ++passed;
    if (r.passed == kKnownFailures.count(r.id) > 0) ++unexpected;
  }
  std::cout << passed << "/" << results.size() << " criteria passed";
  if (unexpected) std::cout << ", " << unexpected << " unexpected outcome(s)";
  std::cout << "\n";
  return unexpected == 0 ? 0 : 1;
}
