#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "spde/runner.hpp"

namespace {

std::string readFile(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw spde::ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Solver and strong-convergence harness for non-autonomous parabolic "
      "SPDEs driven by additive fractional Brownian motion and jumps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int samples = 0;
  std::uint64_t seed = 0;
  int threads = 0;

  bool has_out = false, has_samples = false, has_seed = false, has_threads = false;
  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file (JSON)")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { has_out = true; });
    cmd->add_option("--samples", samples, "Monte-Carlo sample count override")
        ->each([&](const std::string&) { has_samples = true; });
    cmd->add_option("--seed", seed, "base seed override")
        ->each([&](const std::string&) { has_seed = true; });
    cmd->add_option("--threads", threads,
                    "worker count (overrides SPDE_THREADS)")
        ->each([&](const std::string&) { has_threads = true; });
  };

  addCommon(app.add_subcommand("simulate", "write one trajectory as CSV"));
  addCommon(app.add_subcommand(
      "convergence", "run a strong-error study and fit the convergence rate"));
  addCommon(app.add_subcommand(
      "validate-noise", "statistical checks of the noise generators (JSON)"));

  CLI11_PARSE(app, argc, argv);

  try {
    const spde::RunConfig cfg = spde::parseConfig(readFile(config_path));
    spde::CliOverrides overrides;
    if (has_out) overrides.out_dir = out_dir;
    if (has_samples) overrides.samples = samples;
    if (has_seed) overrides.seed = seed;
    if (has_threads) overrides.threads = threads;
    const std::string name = app.get_subcommands().front()->get_name();
    return spde::runSubcommand(name, cfg, overrides);
  } catch (const spde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
