#include "ildvs/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ildvs {

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::dvs: return "DVS";
    case Scheme::iil: return "IIL";
    case Scheme::ildvs: return "ILDVS";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "dvs") return Scheme::dvs;
  if (s == "iil") return Scheme::iil;
  if (s == "ildvs") return Scheme::ildvs;
  throw InvalidArgument("unknown scheme '" + name + "' (dvs|iil|ildvs)");
}

void TrialConfig::validate() const {
  gains.validate();
  detection.intr.validate();
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
  if (trial < 1) throw InvalidArgument("trial index starts at 1");
  if (!(detection.noise_px >= 0)) throw InvalidArgument("noise must be non-negative");
  if ((scheme != Scheme::dvs) != (model != nullptr)) {
    throw InvalidArgument(std::string("scheme ") + to_string(scheme) +
                          (model ? " takes no model" : " requires a trained model"));
  }
  make_grid(grid_center, grid_offset).position(position);
}

double metric_eta(const FeatureVec& f, const FeatureVec& f_star) { return (f - f_star).values.norm(); }

double metric_delta(const Vec3d& p_T, const Vec3d& p_g, bool has_ground_truth) {
  if (!has_ground_truth) throw NoGroundTruth("no demonstrated endpoint for this position");
  return (p_T - p_g).norm();
}

double metric_epsilon(const Quatd& q_T, const Quatd& q_g) { return geodesic_angle(q_T, q_g); }

double success_drop(const Posed& final_ee, const SceneObject& cup, const Quatd& q_goal,
                    const SuccessCriterion& c) {
  const Vec3d drop = final_ee.transform(Vec3d(0, 0, c.drop_offset));
  const double d = (drop - cup.pose.p).head<2>().norm();
  if (metric_epsilon(final_ee.q, q_goal) > c.eps_max) return 0.0;
  if (d <= c.r_inner) return 1.0;
  if (d <= c.r_rim) return 0.5;
  return 0.0;
}

Twistd camera_to_ee_twist(const RobotState& robot, const Vec3d& v_cam, const Vec3d& w_cam) {
  const Posed cam = robot.camera();
  const Vec3d w = cam.q.rotate(w_cam);
  const Vec3d lever = cam.p - robot.ee.p;
  return Twistd(cam.q.rotate(v_cam) - w.cross(lever), w);
}

namespace {

std::size_t position_index(const std::string& id) {
  for (std::size_t i = 0; i < PositionGrid::kNames.size(); ++i)
    if (id == PositionGrid::kNames[i]) return i;
  throw InvalidArgument("unknown position '" + id + "'");
}

// Streams keyed by (task, position, trial) and never by scheme, so every scheme
// sees the same start jitter and detector noise.
std::mt19937_64 trial_rng(const TrialConfig& cfg, unsigned stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(cfg.task),
                    static_cast<std::uint32_t>(position_index(cfg.position)),
                    static_cast<std::uint32_t>(cfg.trial), stream};
  return std::mt19937_64(seq);
}

RobotState goal_robot(const TrialConfig& cfg) {
  RobotState r;
  r.ee = make_task(cfg.task, cfg.grid_center, cfg.geometry).goal;
  return r;
}

// Velocity command of one control step for the configured scheme. Advances the
// NODE belief for the learned schemes and reports the camera-frame angular rate.
Twistd scheme_command(const TrialConfig& cfg, const RobotState& robot, const FeatureVec& f8,
                      const FeatureVec& e, const Eigen::Vector4d& depths, NodeState& belief,
                      Vec3d& w_cam) {
  const Posed cam = robot.camera();
  switch (cfg.scheme) {
    case Scheme::dvs: {
      const auto L = stack_interaction(f8, depths);
      const auto out = classic_law(e.values, L, Eigen::Matrix<double, 6, 1>::Zero(), cfg.gains);
      w_cam = out.velocity.tail<3>();
      return camera_to_ee_twist(robot, out.velocity.head<3>(), w_cam);
    }
    case Scheme::iil: {
      const RolloutStep rs = rollout_step(*cfg.model, belief);
      belief = rs.next;
      w_cam = cam.q.conjugate().rotate(rs.sigma.angular);
      return rs.sigma;
    }
    case Scheme::ildvs: {
      const RolloutStep rs = rollout_step(*cfg.model, belief);
      belief = rs.next;
      // The angular part is commanded as is; the linear part becomes the
      // secondary task of the translational norm law.
      const Vec3d lever = cam.p - robot.ee.p;
      const Vec3d sigma_cam =
          cam.q.conjugate().rotate(rs.sigma.linear + rs.sigma.angular.cross(lever));
      w_cam = cam.q.conjugate().rotate(rs.sigma.angular);
      const auto L = stack_interaction(f8, depths);
      const auto out = combined_law(e.values, L.leftCols<3>(), sigma_cam, cfg.gains);
      return camera_to_ee_twist(robot, out.velocity, w_cam);
    }
  }
  throw InvalidArgument("unknown scheme");
}

}  // namespace

FeatureVec desired_features(const TrialConfig& cfg) {
  const World trained = make_world(cfg.task, cfg.grid_center, "center", cfg.geometry);
  std::mt19937_64 unused(0);
  const auto dets = detect(trained.objects, goal_robot(cfg).camera(), cfg.detection.intr, 0.0, unused);
  return to_features8(squarify(select_label(dets, trained.active_label)), cfg.detection.intr);
}

double desired_depth(const TrialConfig& cfg) {
  const World trained = make_world(cfg.task, cfg.grid_center, "center", cfg.geometry);
  return goal_robot(cfg).camera().inverse_transform(trained.active().centroid_world()).z();
}

TrialResult run_trial(const TrialConfig& cfg) {
  cfg.validate();
  const PositionGrid grid = make_grid(cfg.grid_center, cfg.grid_offset);
  const World world = make_world(cfg.task, grid.position(cfg.position), cfg.position, cfg.geometry);
  const ExpertTask task = make_task(cfg.task, cfg.grid_center, cfg.geometry);
  const FeatureVec f_star = desired_features(cfg);
  const double z_desired = cfg.depth == DepthMode::fixed ? cfg.gains.z_hat : desired_depth(cfg);
  const CameraIntrinsics& intr = cfg.detection.intr;

  std::mt19937_64 start_rng = trial_rng(cfg, 0);
  std::mt19937_64 noise_rng = trial_rng(cfg, 1);
  std::uniform_real_distribution<double> jitter(-cfg.start_jitter_m, cfg.start_jitter_m);

  RobotState robot;
  robot.ee = task.nominal_start;
  for (int i = 0; i < 3; ++i) robot.ee.p[i] += jitter(start_rng);

  TrialResult res;
  res.task = cfg.task;
  res.scheme = cfg.scheme;
  res.position = cfg.position;
  res.trial = cfg.trial;
  res.termination = "horizon";
  res.epsilon_start = metric_epsilon(robot.ee.q, task.goal.q);

  FilterState filter(cfg.detection.filter_window);
  std::optional<BBox> held;  // last filtered box
  int lost_run = 0;
  NodeState belief;

  for (int k = 0;; ++k) {
    const Posed cam = robot.camera();
    bool seen = true;
    try {
      const auto dets = detect(world.objects, cam, intr, cfg.detection.noise_px, noise_rng);
      const BBox box = squarify(select_label(dets, world.active_label));
      held = bbox_from_corners(smooth(filter, to_pixel_corners(box)));
      lost_run = 0;
    } catch (const NoDetection&) {
      seen = false;
    } catch (const LabelNotFound&) {
      seen = false;
    }
    if (!seen) {
      ++res.lost_frames;
      ++lost_run;
    }
    if (!held) {
      res.eta_series.push_back(std::numeric_limits<double>::quiet_NaN());
      res.termination = "target_lost";
      break;
    }
    const FeatureVec f8 = to_features8(*held, intr);
    const FeatureVec e = f8 - f_star;
    res.eta_series.push_back(e.values.norm());
    if (k == cfg.horizon) break;
    if (cfg.scheme != Scheme::iil && lost_run > cfg.lost_limit) {
      res.termination = "target_lost";
      break;
    }

    if (k == 0 && cfg.model) {
      belief = NodeState::from_pose(to_features4(*held, intr).values, robot.ee, cfg.model->anchor);
    }

    Eigen::Vector4d depths = Eigen::Vector4d::Constant(z_desired);
    if (cfg.depth == DepthMode::ground_truth) {
      depths.setConstant(cam.inverse_transform(world.active().centroid_world()).z());
    }

    Twistd cmd;
    Vec3d w_cam = Vec3d::Zero();
    try {
      cmd = scheme_command(cfg, robot, f8, e, depths, belief, w_cam);
    } catch (const NumericalBlowup&) {
      res.termination = "numerical_blowup";
      break;
    } catch (const DegenerateDirection&) {
      res.termination = "degenerate_direction";
      break;
    } catch (const SingularSystem&) {
      res.termination = "singular_system";
      break;
    }
    res.omega_z.push_back(w_cam.z());

    try {
      robot = step(world, robot, cmd, cfg.dt);
    } catch (const WorkspaceViolation&) {
      res.termination = "workspace_violation";
      break;
    }
    res.steps = k + 1;
  }

  res.eta_final = res.eta_series.back();
  res.final_ee = robot.ee;
  res.epsilon = metric_epsilon(robot.ee.q, task.goal.q);
  if (grid.is_trained(cfg.position)) res.delta = metric_delta(robot.ee.p, task.goal.p);
  if (cfg.task == Task::cup) {
    res.success = success_drop(robot.ee, world.active(), task.goal.q, cfg.success);
  }
  return res;
}

std::vector<TrialResult> run_protocol(const ProtocolConfig& cfg, const TrialCallback& on_trial) {
  if (cfg.trials < 1) throw InvalidArgument("trials must be >= 1");
  std::vector<TrialResult> out;
  for (Scheme s : cfg.schemes) {
    for (const char* pos : PositionGrid::kNames) {
      for (int t = 1; t <= cfg.trials; ++t) {
        TrialConfig tc = cfg.base;
        tc.scheme = s;
        tc.position = pos;
        tc.trial = t;
        if (s == Scheme::dvs) tc.model = nullptr;
        std::optional<TrialResult> prior;
        if (cfg.lookup) prior = cfg.lookup(tc);
        out.push_back(prior ? *prior : run_trial(tc));
        if (on_trial) on_trial(out.back(), prior.has_value());
      }
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(line);
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kResultsHeader =
    "task,scheme,position,trial,steps,eta_final,delta,epsilon,success,termination";

}  // namespace

void write_results_header(std::ostream& out) { out << kResultsHeader << '\n'; }

void write_result_row(std::ostream& out, const TrialResult& r) {
  out << to_string(r.task) << ',' << to_string(r.scheme) << ',' << r.position << ',' << r.trial
      << ',' << r.steps << ',' << fmt(r.eta_final) << ',' << (r.delta ? fmt(*r.delta) : "") << ','
      << fmt(r.epsilon) << ',' << (r.success ? fmt(*r.success) : "") << ',' << r.termination
      << '\n';
}

std::vector<TrialResult> read_results(std::istream& in) {
  std::vector<TrialResult> out;
  std::string line;
  long lineno = 0;
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("bad number '" + s + "'", lineno);
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == kResultsHeader) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw ParseError("expected 10 fields", lineno);
    TrialResult r;
    try {
      r.task = parse_task(f[0]);
      r.scheme = parse_scheme(f[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), lineno);
    }
    r.position = f[2];
    r.trial = static_cast<int>(num(f[3]));
    r.steps = static_cast<int>(num(f[4]));
    r.eta_final = num(f[5]);
    if (!f[6].empty()) r.delta = num(f[6]);
    r.epsilon = num(f[7]);
    if (!f[8].empty()) r.success = num(f[8]);
    r.termination = f[9];
    out.push_back(std::move(r));
  }
  return out;
}

void write_eta_series(std::ostream& out, const TrialResult& r) {
  out << "step,eta\n";
  for (std::size_t k = 0; k < r.eta_series.size(); ++k) out << k << ',' << fmt(r.eta_series[k]) << '\n';
}

std::string eta_series_filename(const TrialResult& r) {
  return std::string("eta_") + to_string(r.task) + "_" + to_string(r.scheme) + "_" + r.position +
         "_t" + std::to_string(r.trial) + ".csv";
}

}  // namespace ildvs
