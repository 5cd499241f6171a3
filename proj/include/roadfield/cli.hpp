#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 2,
  kConsistencyFailure = 3,
};

struct RunConfig {
  std::string command;
  ModelParams params;

  // Geometry and sampling.
  std::optional<double> angle;  ///< cone half-angle a
  std::optional<double> theta;  ///< direction, measured from the y-axis
  int n = 64;
  // Point queries (value, path, hamiltonian, legendre).
  std::optional<double> t;
  std::optional<double> x;
  std::optional<double> y;
  std::optional<double> q;
  std::optional<double> v;

  // Simulation.
  double h = 0.2;
  double Lx = 160.0;
  double Ly = 90.0;
  double t_max = 40.0;
  double level = 0.5;
  std::string snapshot;  ///< optional RDF1 dump of the final state

  // Output.
  std::string format = "json";
  std::string output;  ///< empty: standard output

  // verify
  bool quick = false;
  bool inject_fault = false;

  /// Throws InvalidConfig on unknown commands, bad formats or parameters.
  void validate() const;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"hamiltonian", "legendre", "value", "speed", "wulff",
                                              "cone",        "path",     "simulate", "verify"};
  return names;
}

/// Parses argv. The first positional argument is the command. Values from
/// --config (a JSON file) fill in every option not given on the command line.
/// Throws InvalidConfig.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes the command and writes the artifact to config.output (or `out`).
/// Returns an ExitCode; errors are reported on `err` as
/// "error code=<name>: <message>".
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-code mapping for parse failures.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roadfield::cli
