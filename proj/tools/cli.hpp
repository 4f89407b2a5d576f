#pragma once

// Command-line front end: demo, train, run, protocol and report subcommands.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ildvs/config.hpp"

namespace ildvs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct Cli {
  CLI::App app{"Imitation-learning direct visual servoing: demos, training, evaluation", "ildvs"};
  RunConfig cfg;
  std::string config_path;
  std::string loss_curve_path;
  std::string series_dir;
  std::string schemes = "dvs,iil,ildvs";
  std::vector<std::string> result_files;
  bool resume = false;

  CLI::App* demo = nullptr;
  CLI::App* train = nullptr;
  CLI::App* run = nullptr;
  CLI::App* protocol = nullptr;
  CLI::App* report = nullptr;
};

// All subcommands and flags bound to a default RunConfig.
std::unique_ptr<Cli> make_cli();

// Parses args (without the program name), merges an optional --config file,
// executes the subcommand and returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ildvs::cli
