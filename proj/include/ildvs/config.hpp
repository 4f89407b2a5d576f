#pragma once

// Run configuration shared by the command-line front end. Files are flat INI:
//   [section]
//   key = value
// Section names group keys by module and are otherwise ignored; each key is the
// long name of a command-line flag (without the leading dashes). Values from
// the file apply first and flags given on the command line override them.

#include <string>
#include <utility>
#include <vector>

#include "ildvs/harness.hpp"
#include "ildvs/node.hpp"

namespace ildvs {

struct RunConfig {
  std::string task;  // mouse | cup
  std::string demos_path;
  std::string checkpoint_path;
  std::string out;

  VsGains gains;
  std::string depth = "desired";  // desired | fixed | ground_truth
  TrainConfig train;
  std::string integrator = "euler";
  std::vector<double> grid_center{0.5, 0.0, 0.0};
  double grid_offset = 0.15;
  std::uint64_t seed = 1;
  double noise_px = 1.0;
  int filter_window = 50;
  int demos = 4;
  int steps = 500;
  double dt = 1.0 / 30.0;
  int horizon = 700;
  int trials = 3;
  std::string scheme = "dvs";
  std::string position = "center";
  int trial = 1;
  SuccessCriterion success;

  // Throws InvalidArgument naming the offending setting.
  void validate() const;
  // Trial settings derived from this configuration (model not attached).
  TrialConfig trial_config() const;
  TrainConfig train_config() const;
  DetectionConfig detection_config() const;
};

// (key, value) pairs in file order, section names dropped. Throws ParseError
// with the line number of a malformed line.
std::vector<std::pair<std::string, std::string>> read_ini(const std::string& path);

DepthMode parse_depth_mode(const std::string& name);

}  // namespace ildvs
