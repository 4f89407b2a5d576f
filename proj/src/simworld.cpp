#include "ildvs/simworld.hpp"

#include <algorithm>
#include <cmath>

namespace ildvs {

const SceneObject& World::active() const {
  for (const auto& o : objects)
    if (o.label == active_label) return o;
  throw LabelNotFound("active object '" + active_label + "' not in world");
}

RobotState step(const World& world, const RobotState& robot, const Twistd& twist, double dt) {
  if (!twist.finite()) throw WorkspaceViolation("non-finite velocity command");
  RobotState next = robot;
  next.ee = pose_integrate(robot.ee, twist, dt);
  next.time = robot.time + dt;
  if (!world.workspace.contains(next.ee.p)) {
    throw WorkspaceViolation("ee at (" + std::to_string(next.ee.p.x()) + ", " +
                             std::to_string(next.ee.p.y()) + ", " +
                             std::to_string(next.ee.p.z()) + ")");
  }
  return next;
}

Vec3d PositionGrid::position(const std::string& id) const {
  if (id == "center") return center;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    if (id == kNames[i + 1]) return offsets[i];
  throw InvalidArgument("unknown position '" + id + "' (center|N1|N2|N3|N4)");
}

PositionGrid make_grid(const Vec3d& center, double offset) {
  PositionGrid g;
  g.center = center;
  g.offsets = {center + Vec3d(offset, 0, 0), center - Vec3d(offset, 0, 0),
               center + Vec3d(0, offset, 0), center - Vec3d(0, offset, 0)};
  return g;
}

const char* to_string(Task task) { return task == Task::mouse ? "mouse" : "cup"; }

Task parse_task(const std::string& name) {
  if (name == "mouse") return Task::mouse;
  if (name == "cup") return Task::cup;
  throw InvalidArgument("unknown task '" + name + "' (mouse|cup)");
}

namespace {

Quatd from_columns(const Vec3d& x, const Vec3d& y, const Vec3d& z) {
  Mat3<double> R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return Quatd::from_rotation(R);
}

Vec3d uniform_cube(std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  const double a = u(rng), b = u(rng), c = u(rng);
  return {a, b, c};
}

double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

double min_jerk_rate(double tau) {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  return 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau);
}

}  // namespace

Quatd look_down_orientation() { return from_columns({0, -1, 0}, {-1, 0, 0}, {0, 0, -1}); }
Quatd look_along_x_orientation() { return from_columns({0, -1, 0}, {0, 0, -1}, {1, 0, 0}); }

World make_world(Task task, const Vec3d& object_position, const std::string& position_id,
                 const TaskGeometry& geom) {
  World w;
  w.position_id = position_id;
  SceneObject obj = task == Task::mouse
                        ? make_box("mouse", geom.mouse_size.x(), geom.mouse_size.y(),
                                   geom.mouse_size.z())
                        : make_cylinder("cup", geom.cup_radius, geom.cup_height, geom.cup_samples);
  obj.pose = Posed(Vec3d(object_position.x(), object_position.y(), w.table_height), Quatd());
  w.active_label = obj.label;
  w.objects.push_back(std::move(obj));
  if (task == Task::cup && geom.clutter) {
    SceneObject book = make_box("book", 0.20, 0.15, 0.03);
    book.pose = Posed(Vec3d(0.85, -0.45, w.table_height), Quatd());
    w.objects.push_back(std::move(book));
    SceneObject bottle = make_cylinder("bottle", 0.035, 0.22, 12);
    bottle.pose = Posed(Vec3d(0.95, 0.45, w.table_height), Quatd());
    w.objects.push_back(std::move(bottle));
  }
  return w;
}

Posed ExpertTask::sample_start(std::mt19937_64& rng) const {
  const Vec3d dp = uniform_cube(rng, jitter_m);
  const Vec3d dr = uniform_cube(rng, jitter_rad);
  return Posed(nominal_start.p + dp, quat_exp<double>(dr) * nominal_start.q);
}

ExpertTask make_task(Task task, const Vec3d& c, const TaskGeometry& geom) {
  ExpertTask t;
  t.task = task;
  t.jitter_m = geom.start_jitter_m;
  t.jitter_rad = geom.start_jitter_rad;
  t.motion_fraction = geom.motion_fraction;
  const Vec3d base(c.x(), c.y(), 0.0);
  t.goal = Posed(base + Vec3d(0, 0, geom.goal_height), look_down_orientation());
  if (task == Task::mouse) {
    t.nominal_start = Posed(base + geom.mouse_start_offset,
                            Quatd::from_axis_angle(Vec3d::UnitZ(), geom.mouse_start_yaw) *
                                look_down_orientation());
  } else {
    t.nominal_start = Posed(base + geom.cup_start_offset, look_along_x_orientation());
    t.via = base + geom.cup_via_offset;
  }
  return t;
}

ExpertPath::ExpertPath(const Posed& start, const Posed& goal, std::optional<Vec3d> via,
                       double duration)
    : start_(start), goal_(goal), via_(via), duration_(duration) {
  if (!(duration > 0)) throw InvalidArgument("expert path duration must be positive");
}

double ExpertPath::phase(double t) const { return min_jerk(t / duration_); }
double ExpertPath::phase_rate(double t) const { return min_jerk_rate(t / duration_) / duration_; }

Vec3d ExpertPath::position_at(double s) const {
  if (!via_) return start_.p + s * (goal_.p - start_.p);
  return (1 - s) * (1 - s) * start_.p + 2 * s * (1 - s) * *via_ + s * s * goal_.p;
}

Vec3d ExpertPath::position_derivative(double s) const {
  if (!via_) return goal_.p - start_.p;
  return 2 * (1 - s) * (*via_ - start_.p) + 2 * s * (goal_.p - *via_);
}

Posed ExpertPath::pose(double t) const {
  const double s = phase(t);
  if (s >= 1.0) return goal_;
  return Posed(position_at(s), slerp(start_.q, goal_.q, s));
}

Vec3d ExpertPath::linear_velocity(double t) const {
  return position_derivative(phase(t)) * phase_rate(t);
}

bool object_in_view(const SceneObject& obj, const Posed& cam_pose, const CameraIntrinsics& intr) {
  for (std::size_t i = 0; i < obj.model_points.size(); ++i) {
    const Vec3d pc = cam_pose.inverse_transform(obj.world_point(i));
    if (!(pc.z() > kMinDepth)) return false;
    const double u = intr.fu * pc.x() / pc.z() + intr.cu;
    const double v = intr.fv * pc.y() / pc.z() + intr.cv;
    if (u < 0 || u > intr.width || v < 0 || v > intr.height) return false;
  }
  return true;
}

DemoRecord expert_demo(const World& world, const ExpertTask& task, int steps, double dt,
                       const DetectionConfig& det, std::mt19937_64& rng,
                       const RobotState& robot_template) {
  if (steps < 2) throw InvalidArgument("a demonstration needs at least two steps");
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
  DemoRecord rec;
  rec.start = task.sample_start(rng);
  std::mt19937_64 noise_rng(rng());
  const ExpertPath path(rec.start, task.goal, task.via, task.motion_fraction * steps * dt);

  RobotState robot = robot_template;
  robot.ee = rec.start;
  robot.time = 0;
  FilterState filter(det.filter_window);
  const SceneObject& target = world.active();
  rec.states.resize(kStateDim, steps);

  for (int k = 0; k < steps; ++k) {
    const Posed cam = robot.camera();
    if (!object_in_view(target, cam, det.intr)) {
      throw ObjectOutOfView("'" + target.label + "' left the image at step " + std::to_string(k));
    }
    const auto dets = detect(world.objects, cam, det.intr, det.noise_px, noise_rng);
    const BBox box = squarify(select_label(dets, world.active_label));
    const BBox filtered = bbox_from_corners(smooth(filter, to_pixel_corners(box)));
    const FeatureVec f4 = to_features4(filtered, det.intr);
    rec.states.col(k) = NodeState::from_pose(f4.values, robot.ee, task.goal.q).x;
    rec.poses.push_back(robot.ee);
    if (k + 1 < steps) {
      const Twistd cmd = twist_between(robot.ee, path.pose((k + 1) * dt), dt);
      rec.commands.push_back(cmd);
      robot = step(world, robot, cmd, dt);
    }
  }
  return rec;
}

Demonstrations collect_demos(Task task, const Vec3d& trained_position, int count, int steps,
                             double dt, const DetectionConfig& det, std::uint64_t seed,
                             const TaskGeometry& geom, std::vector<Posed>* starts) {
  if (count < 1) throw InvalidArgument("need at least one demonstration");
  const World world = make_world(task, trained_position, "center", geom);
  const ExpertTask et = make_task(task, trained_position, geom);
  std::mt19937_64 rng(seed);
  std::vector<DemoRecord> recs;
  for (int n = 0; n < count; ++n) recs.push_back(expert_demo(world, et, steps, dt, det, rng));

  Demonstrations d;
  d.task = to_string(task);
  d.dt = dt;
  d.anchor = recs.front().poses.back().q;
  for (auto& r : recs) {
    for (int k = 0; k < steps; ++k) {
      r.states.block<3, 1>(7, k) = kRotationScale * tangent_coords(r.poses[k].q, d.anchor);
    }
    d.sequences.push_back(std::move(r.states));
    if (starts) starts->push_back(r.start);
  }
  return d;
}

}  // namespace ildvs
