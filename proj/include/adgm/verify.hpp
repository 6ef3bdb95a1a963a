#pragma once

#include <string>
#include <vector>

namespace adgm {

/// One invariant check of a verify suite. `detail` carries the measured
/// quantities with fixed formatting so reports are byte-stable.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> verify_mesh();
std::vector<CheckResult> verify_forms();
std::vector<CheckResult> verify_estimator();
std::vector<CheckResult> verify_interp();
std::vector<CheckResult> verify_analysis();

/// Dispatch by suite name ("mesh", "forms", "estimator", "interp",
/// "analysis", "all"); throws on unknown suite.
std::vector<CheckResult> run_suite(const std::string& suite);

}  // namespace adgm
