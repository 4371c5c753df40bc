#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wass {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;  // pass iff worst <= tolerance
  std::string detail;

  bool pass() const { return failures == 0; }
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool all_pass() const;
};

/// Randomized property suites over the solvers and the bound quantities.
/// `trials` scales the case counts; every suite is deterministic in `seed`.
VerifyReport run_property_suites(std::uint64_t seed, std::size_t trials);

std::string verify_report_json(const VerifyReport& report);

}  // namespace wass
