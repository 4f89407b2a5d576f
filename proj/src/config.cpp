#include "ildvs/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ildvs {

DepthMode parse_depth_mode(const std::string& name) {
  if (name == "desired") return DepthMode::desired;
  if (name == "fixed") return DepthMode::fixed;
  if (name == "ground_truth") return DepthMode::ground_truth;
  throw InvalidArgument("unknown depth mode '" + name + "' (desired|fixed|ground_truth)");
}

void RunConfig::validate() const {
  if (!task.empty()) parse_task(task);
  gains.validate();
  parse_depth_mode(depth);
  train_config().validate();
  parse_scheme(scheme);
  if (grid_center.size() != 3) throw InvalidArgument("grid center needs 3 components");
  if (!(grid_offset > 0)) throw InvalidArgument("grid offset must be positive");
  if (!(noise_px >= 0)) throw InvalidArgument("noise must be non-negative");
  if (filter_window < 1) throw InvalidArgument("filter window must be >= 1");
  if (demos < 1) throw InvalidArgument("number of demonstrations must be >= 1");
  if (steps < 2) throw InvalidArgument("demonstration steps must be >= 2");
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (trial < 1) throw InvalidArgument("trial index starts at 1");
  make_grid(Vec3d::Zero()).position(position);
  if (!(success.r_inner > 0 && success.r_inner < success.r_rim)) {
    throw InvalidArgument("need 0 < r_inner < r_rim");
  }
  if (!(success.eps_max > 0)) throw InvalidArgument("eps_max must be positive");
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.integrator = parse_integrator(integrator);
  t.dt = dt;
  t.seed = seed;
  return t;
}

DetectionConfig RunConfig::detection_config() const {
  DetectionConfig d;
  d.noise_px = noise_px;
  d.filter_window = static_cast<std::size_t>(filter_window);
  return d;
}

TrialConfig RunConfig::trial_config() const {
  TrialConfig t;
  if (!task.empty()) t.task = parse_task(task);
  t.scheme = parse_scheme(scheme);
  t.position = position;
  t.trial = trial;
  t.horizon = horizon;
  t.dt = dt;
  t.gains = gains;
  t.depth = parse_depth_mode(depth);
  t.detection = detection_config();
  t.grid_center = Vec3d(grid_center[0], grid_center[1], grid_center[2]);
  t.grid_offset = grid_offset;
  t.success = success;
  t.seed = seed;
  return t;
}

std::vector<std::pair<std::string, std::string>> read_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(path + ": " + e.message(), static_cast<long>(e.line()));
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      out.emplace_back(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) out.emplace_back(key, leaf.data());
  }
  return out;
}

}  // namespace ildvs
