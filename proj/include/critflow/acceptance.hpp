/// @file acceptance.hpp
/// @brief Registry of the acceptance checks run by `critflow verify` and the
///        acceptance test binary. Every check reports one measured value, the
///        bound it is held to and a verdict.

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace critflow {

struct AcceptanceHooks {
  /// Negates divergence() inside the adjointness check.
  bool flip_divergence_sign = false;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  std::string op = "<=";  ///< relation value must satisfy against bound
  double bound = 0.0;
  bool pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;  ///< 0: none
  std::string note;
};

struct AcceptanceCheck {
  std::string name;
  double time_limit = 0.0;  ///< seconds, 0: none
  std::function<CheckResult(const AcceptanceHooks&)> run;
};

std::vector<AcceptanceCheck> acceptance_checks();

/// Runs one check, timing it and turning exceptions into a failure.
CheckResult run_check(const AcceptanceCheck& check, const AcceptanceHooks& hooks = {});

/// "<name> value=<v> bound=<op><b> time=<s>s PASS|FAIL [note]"
std::string format_check(const CheckResult& r);

}  // namespace critflow
