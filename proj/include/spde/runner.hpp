#pragma once

#include <optional>
#include <string>

#include "spde/config.hpp"

namespace spde {

/// Command-line overrides; flags beat config values.
struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Dispatches one subcommand (simulate | convergence | validate-noise).
/// Writes artifacts below the output directory and returns the process
/// exit status: 0 when every declared pass band holds.
int runSubcommand(const std::string& name, RunConfig cfg,
                  const CliOverrides& overrides);

/// Resolved thread count: override flag, else SPDE_THREADS, else 1.
int resolveThreads(const std::optional<int>& flag);

}  // namespace spde
