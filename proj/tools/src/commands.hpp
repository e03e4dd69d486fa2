#pragma once

#include <ostream>

#include "config.hpp"

namespace mechforce::cli {

struct RunOptions {
  std::string command;  // verify, integrate, reduce
  std::optional<std::string> candidate;
  std::optional<Verdict> expect;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> tolerance;
  std::optional<std::size_t> samples;
  std::vector<std::pair<double, double>> box;
  std::optional<std::string> out_dir;
  bool reproducible = false;
  // integrate
  std::vector<double> q0;
  std::optional<double> t1;
  std::optional<double> step;
  // reduce: replaces the configured generators
  std::vector<double> xi;
};

/// Runs one command on one system and writes the JSON report to `out`.
/// Returns 0 when every check matches its expectation, 1 otherwise. Throws
/// UsageError for input problems.
int run_command(const SystemConfig& config, const RunOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace mechforce::cli
