// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Set RF_SKIP_SIMULATION=1 to leave out the PDE runs.
#include <cstdlib>
#include <iostream>
#include <string>

#include "roadfield/verify.hpp"

int main() {
  roadfield::AcceptanceOptions opt;
  opt.print = true;
  if (const char* skip = std::getenv("RF_SKIP_SIMULATION")) opt.skip_simulation = std::string(skip) == "1";
  const auto results = roadfield::acceptance_battery(opt);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
