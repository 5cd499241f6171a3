#pragma once

#include <string>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield {

/// Outcome of one named check. `measured` is the worst observed deviation or
/// the quantity itself, compared against `reference` within `tolerance`.
struct CheckResult {
  std::string name;
  std::string group;
  std::string basis;  ///< statement being checked
  double measured = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;  ///< 0 when no runtime budget applies
};

struct VerifyOptions {
  ModelParams params;
  /// Skip simulation-backed checks.
  bool quick = false;
  /// Include the acceptance battery after the property suites.
  bool acceptance = true;
  /// Shift H_r by `fault_size` inside the duality checks (self-test).
  bool inject_hr_fault = false;
  double fault_size = 0.05;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  [[nodiscard]] bool passed() const;
  [[nodiscard]] std::size_t failures() const;
  [[nodiscard]] std::vector<std::string> failed_names() const;
};

/// Property suites of every module, evaluated at options.params, followed by
/// the acceptance battery when enabled.
VerifyReport run_verify(const VerifyOptions& options);

struct AcceptanceOptions {
  /// Skip criterion 10 (the PDE runs).
  bool skip_simulation = false;
  /// Print one PASS/FAIL line per criterion as it finishes.
  bool print = false;
};

/// Criteria 1-10 at their stated tolerances and runtime budgets.
std::vector<CheckResult> acceptance_battery(const AcceptanceOptions& options);

/// One line: "PASS|FAIL <name>: measured=... reference=... tol=... (t s)".
std::string format_check(const CheckResult& check);

}  // namespace roadfield
