#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tdsec/power_flow.hpp"

namespace tdsec {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_input = 2,
  exit_solver = 3,
  exit_invariant = 4,
};

enum class OutputFormat { csv, json, both };

/// Everything a command needs to reproduce its outputs.
struct RunManifest {
  std::string network_path;
  std::string profiles_dir;  ///< empty: the network file's directory
  std::string scenario_path;
  std::string catalog_path;
  std::string out_dir;
  RunSettings run;
  SolverConfig solver;
  double voltage_band = 0.05;
  unsigned workers = 1;
  OutputFormat format = OutputFormat::both;
  /// Always true: no clocks, random sources or environment lookups feed
  /// into any output.
  bool deterministic = true;
};

/// Parses arguments and dispatches a subcommand. Returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdsec
