#pragma once

// Kinematic eye-in-hand world: objects on a table, a velocity-integrated end
// effector carrying a rigidly mounted camera, the five-position evaluation grid,
// and a scripted expert producing demonstrations.
//
// Frames: world z points up from the table plane z = table_height. The camera
// frame has x right, y down and z along the optical axis.

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ildvs/node.hpp"
#include "ildvs/perception.hpp"

namespace ildvs {

struct Workspace {
  Vec3d lo{0.0, -0.7, 0.02};
  Vec3d hi{1.1, 0.7, 1.0};

  bool contains(const Vec3d& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

struct RobotState {
  Posed ee;
  Posed extrinsic{Vec3d(0.03, 0.0, 0.0), Quatd()};  // camera in the ee frame
  double time = 0;

  Posed camera() const { return compose(ee, extrinsic); }
};

struct World {
  std::vector<SceneObject> objects;
  double table_height = 0;
  std::string active_label;
  std::string position_id;
  Workspace workspace;

  const SceneObject& active() const;
};

// pose_integrate with the twist, time += dt. Throws WorkspaceViolation when the
// new ee position leaves the workspace or the twist is not finite.
RobotState step(const World& world, const RobotState& robot, const Twistd& twist, double dt);

struct PositionGrid {
  Vec3d center;
  std::array<Vec3d, 4> offsets;  // N1 +x, N2 -x, N3 +y, N4 -y

  static constexpr std::array<const char*, 5> kNames{"center", "N1", "N2", "N3", "N4"};
  Vec3d position(const std::string& id) const;
  bool is_trained(const std::string& id) const { return id == "center"; }
};

PositionGrid make_grid(const Vec3d& center, double offset = 0.15);

enum class Task { mouse, cup };
const char* to_string(Task task);
Task parse_task(const std::string& name);

// Artifact geometry: object sizes and nominal poses relative to the object.
struct TaskGeometry {
  Vec3d mouse_size{0.11, 0.06, 0.035};
  double cup_radius = 0.04;
  double cup_height = 0.10;
  int cup_samples = 16;
  double goal_height = 0.35;                     // ee height above the table at the goal
  Vec3d mouse_start_offset{-0.06, 0.0, 0.55};   // relative to the object base center
  double mouse_start_yaw = 1.5707963267948966;  // start yaw minus goal yaw (rad)
  Vec3d cup_start_offset{-0.45, 0.0, 0.10};
  Vec3d cup_via_offset{-0.25, 0.0, 0.32};       // Bezier control point
  double start_jitter_m = 0.03;
  double start_jitter_rad = 0.087266462599716474;  // 5 deg
  double motion_fraction = 0.8;                 // share of the demo spent moving
  bool clutter = true;                           // distractor objects in the cup scene
};

// Orientations used by the tasks, as ee (= camera, identity extrinsic rotation) frames.
Quatd look_down_orientation();   // x_c = -y_w, y_c = -x_w, z_c = -z_w
Quatd look_along_x_orientation();  // x_c = -y_w, y_c = -z_w, z_c = +x_w

World make_world(Task task, const Vec3d& object_position, const std::string& position_id,
                 const TaskGeometry& geom = {});

struct ExpertTask {
  Task task = Task::mouse;
  Posed nominal_start;
  Posed goal;
  std::optional<Vec3d> via;  // quadratic Bezier control point for the position path
  double jitter_m = 0.03;
  double jitter_rad = 0.087266462599716474;
  double motion_fraction = 0.8;

  Posed sample_start(std::mt19937_64& rng) const;
};

// Task defined relative to `trained_position`, the object location used for demos.
ExpertTask make_task(Task task, const Vec3d& trained_position, const TaskGeometry& geom = {});

// Minimum-jerk phase from start to goal over `duration`, constant afterwards.
class ExpertPath {
 public:
  ExpertPath(const Posed& start, const Posed& goal, std::optional<Vec3d> via, double duration);

  Posed pose(double t) const;
  Vec3d linear_velocity(double t) const;
  double duration() const { return duration_; }

 private:
  double phase(double t) const;
  double phase_rate(double t) const;
  Vec3d position_at(double s) const;
  Vec3d position_derivative(double s) const;

  Posed start_, goal_;
  std::optional<Vec3d> via_;
  double duration_;
};

struct DetectionConfig {
  CameraIntrinsics intr;
  double noise_px = 1.0;
  std::size_t filter_window = 50;
};

// True when every model point of the object projects inside the image.
bool object_in_view(const SceneObject& obj, const Posed& cam_pose, const CameraIntrinsics& intr);

struct DemoRecord {
  Eigen::MatrixXd states;               // kStateDim x steps
  std::vector<Posed> poses;              // ee pose per step
  std::vector<Twistd> commands;          // steps - 1 commanded twists
  Posed start;
};

// One demonstration of `steps` records at dt. Throws ObjectOutOfView if the
// object leaves the image on any frame.
DemoRecord expert_demo(const World& world, const ExpertTask& task, int steps, double dt,
                       const DetectionConfig& det, std::mt19937_64& rng,
                       const RobotState& robot_template = {});

// N demonstrations anchored at the task goal orientation.
Demonstrations collect_demos(Task task, const Vec3d& trained_position, int count, int steps,
                             double dt, const DetectionConfig& det, std::uint64_t seed,
                             const TaskGeometry& geom = {}, std::vector<Posed>* starts = nullptr);

}  // namespace ildvs
