#pragma once

// rnnbelief <subcommand> [flags]
//
//   train                 train every seed, evaluate each checkpoint, write metrics.csv
//   eval-mi               recompute MI rows from stored checkpoints into mi.csv
//   sweep-generalization  per-epsilon MI of each seed's final checkpoint into generalization.csv
//   report                correlation table and seed-band summary from metrics CSVs
//   validate-config       print the resolved config
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "rnnbelief/experiment.hpp"

namespace rnnbelief::cli {

inline constexpr const char* kOutRootVar = "RNNBELIEF_OUT_ROOT";

class MissingConfigError : public IoError {
 public:
  using IoError::IoError;
};

struct CliCommand {
  std::string subcommand;
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cell;
  int workers = 1;
  std::optional<int> cadence;
  std::vector<std::string> csv;  // report inputs
};

/// Relative output directories resolve under $RNNBELIEF_OUT_ROOT when it is set.
std::filesystem::path resolve_out(const std::string& dir);

/// Loads cmd.config_path and applies the --seed, --cell, --cadence and --out overrides.
experiment::RunConfig load_with_overrides(const CliCommand& cmd);

int report(const CliCommand& cmd, std::ostream& out);
int dispatch(const CliCommand& cmd, std::ostream& out);

/// Parses argv and runs one subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace rnnbelief::cli
