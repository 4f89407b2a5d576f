#pragma once

// Closed- and open-loop drivers for the three schemes over the simulated world,
// the evaluation metrics, the geometric drop criterion and the protocol sweep.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ildvs/node.hpp"
#include "ildvs/servo.hpp"
#include "ildvs/simworld.hpp"

namespace ildvs {

enum class Scheme { dvs, iil, ildvs };
const char* to_string(Scheme scheme);  // "DVS", "IIL", "ILDVS"
Scheme parse_scheme(const std::string& name);  // case-insensitive

// How the depth in the interaction matrix is chosen.
enum class DepthMode {
  desired,       // object depth seen from the goal pose, constant over the trial
  fixed,         // gains.z_hat as given
  ground_truth,  // per-corner true depth of the object centroid (ablation)
};

struct SuccessCriterion {
  double r_inner = 0.03;
  double r_rim = 0.045;
  double eps_max = 0.2;
  double drop_offset = 0.10;  // drop point along the ee z axis (m)
};

struct TrialConfig {
  Task task = Task::mouse;
  Scheme scheme = Scheme::dvs;
  std::string position = "center";
  int trial = 1;
  int horizon = 700;
  double dt = 1.0 / 30.0;
  VsGains gains;
  DepthMode depth = DepthMode::desired;
  const NodeModel* model = nullptr;
  DetectionConfig detection;
  TaskGeometry geometry;
  Vec3d grid_center{0.5, 0.0, 0.0};
  double grid_offset = 0.15;
  double start_jitter_m = 0.01;
  int lost_limit = 30;  // consecutive frames without the target before giving up
  SuccessCriterion success;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrialResult {
  Task task = Task::mouse;
  Scheme scheme = Scheme::dvs;
  std::string position;
  int trial = 1;
  int steps = 0;
  double eta_final = 0;
  std::vector<double> eta_series;  // steps + 1 samples
  std::optional<double> delta;     // trained position only
  double epsilon = 0;
  double epsilon_start = 0;
  std::optional<double> success;   // cup task only
  std::string termination;  // horizon | workspace_violation | target_lost | numerical_blowup | ...
  int lost_frames = 0;
  Posed final_ee;
  std::vector<double> omega_z;     // commanded camera-frame yaw rate per step
};

double metric_eta(const FeatureVec& f, const FeatureVec& f_star);
// Throws NoGroundTruth when the position has no demonstrated endpoint.
double metric_delta(const Vec3d& p_T, const Vec3d& p_g, bool has_ground_truth = true);
double metric_epsilon(const Quatd& q_T, const Quatd& q_g);

// 1, 0.5 or 0 from the horizontal offset of the drop point to the cup axis and
// the orientation error to q_goal.
double success_drop(const Posed& final_ee, const SceneObject& cup, const Quatd& q_goal,
                    const SuccessCriterion& c = {});

// Reference features from a noise-free frame at the goal pose over the trained
// object position, squarified, as normalized corners.
FeatureVec desired_features(const TrialConfig& cfg);
// Depth of the object centroid seen from the goal pose.
double desired_depth(const TrialConfig& cfg);

// The camera twist (camera frame) converted to the ee world-frame twist.
Twistd camera_to_ee_twist(const RobotState& robot, const Vec3d& v_cam, const Vec3d& w_cam);

TrialResult run_trial(const TrialConfig& cfg);

struct ProtocolConfig {
  TrialConfig base;
  std::vector<Scheme> schemes{Scheme::dvs, Scheme::iil, Scheme::ildvs};
  int trials = 3;
  // Returns a finished result to reuse instead of running the trial.
  std::function<std::optional<TrialResult>(const TrialConfig&)> lookup;
};

// Called after each trial; reused is true when the result came from lookup.
using TrialCallback = std::function<void(const TrialResult&, bool reused)>;

// Ordered by scheme, position (center, N1..N4), trial.
std::vector<TrialResult> run_protocol(const ProtocolConfig& cfg, const TrialCallback& on_trial = {});

// Results CSV.
void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const TrialResult& r);
std::vector<TrialResult> read_results(std::istream& in);

// `step,eta` series for one trial.
void write_eta_series(std::ostream& out, const TrialResult& r);
std::string eta_series_filename(const TrialResult& r);

}  // namespace ildvs
