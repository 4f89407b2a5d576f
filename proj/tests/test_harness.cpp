#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "ildvs/harness.hpp"

using namespace ildvs;

namespace {

FeatureVec f8(std::initializer_list<double> v) {
  Eigen::VectorXd x(8);
  int i = 0;
  for (double d : v) x[i++] = d;
  return FeatureVec(x, FeatureUnit::normalized_metric, FeatureArity::corners_8);
}

NodeModel zero_model(Task task) {
  NodeModel m;
  m.params = NodeParams<double>::zeros({kStateDim, 4, kStateDim});
  m.task = to_string(task);
  m.anchor = look_down_orientation();
  return m;
}

}  // namespace

TEST_CASE("eta metric") {
  const FeatureVec a = f8({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  CHECK(metric_eta(a, a) == 0.0);
  const FeatureVec z = f8({0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(metric_eta(f8({3, 4, 0, 0, 0, 0, 0, 0}), z) == 5.0);
  CHECK(metric_eta(a, z) == metric_eta(z, a));
  const FeatureVec pix(a.values, FeatureUnit::pixel, FeatureArity::corners_8);
  CHECK_THROWS_AS(metric_eta(a, pix), UnitMismatch);
}

TEST_CASE("delta metric") {
  CHECK(metric_delta(Vec3d(1, 2, 3), Vec3d(1, 2, 3)) == 0.0);
  CHECK(metric_delta(Vec3d(0, 0.03, 0.04), Vec3d::Zero()) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS(metric_delta(Vec3d::Zero(), Vec3d::Zero(), false), NoGroundTruth);
}

TEST_CASE("epsilon metric") {
  const Quatd q = Quatd::from_axis_angle(Vec3d(0.2, 1, -0.5).normalized(), 1.3);
  CHECK(metric_epsilon(q, q) == 0.0);
  const Quatd yaw = Quatd::from_axis_angle(Vec3d::UnitZ(), std::numbers::pi / 2) * q;
  CHECK(std::abs(metric_epsilon(yaw, q) - std::numbers::pi / 2) < 1e-12);
  const Quatd g = Quatd::from_axis_angle(Vec3d::UnitX(), 2.5);
  CHECK(metric_epsilon(g * yaw, g * q) == doctest::Approx(metric_epsilon(yaw, q)).epsilon(1e-12));
}

TEST_CASE("drop success bands") {
  const World w = make_world(Task::cup, Vec3d(0.5, 0, 0), "center");
  const SceneObject& cup = w.active();
  const Quatd down = look_down_orientation();
  const SuccessCriterion c;
  // Drop point is ee + R * (0, 0, drop_offset): place it over the axis.
  auto ee_for = [&](double dx) {
    const Vec3d drop(0.5 + dx, 0, 0.15);
    return Posed(drop - down.rotate(Vec3d(0, 0, c.drop_offset)), down);
  };
  CHECK(success_drop(ee_for(0), cup, down, c) == 1.0);
  CHECK(success_drop(ee_for(0.5 * (c.r_inner + c.r_rim)), cup, down, c) == 0.5);
  CHECK(success_drop(ee_for(0.06), cup, down, c) == 0.0);
  const Posed tilted(ee_for(0).p, Quatd::from_axis_angle(Vec3d::UnitX(), 0.3) * down);
  CHECK(success_drop(tilted, cup, down, c) == 0.0);
}

TEST_CASE("reference features from the goal view") {
  TrialConfig cfg;
  cfg.task = Task::mouse;
  const FeatureVec f = desired_features(cfg);
  CHECK(f.unit == FeatureUnit::normalized_metric);
  CHECK(f.arity == FeatureArity::corners_8);
  // Squarified: width equals height.
  CHECK(f.values[2] - f.values[0] == doctest::Approx(f.values[7] - f.values[1]));
  CHECK(desired_depth(cfg) > 0.2);
  CHECK(desired_depth(cfg) < cfg.geometry.goal_height);
}

TEST_CASE("camera twist conversion keeps the camera velocity") {
  RobotState r;
  r.ee = Posed(Vec3d(0.4, 0.1, 0.5), Quatd::from_axis_angle(Vec3d(1, 0, 1).normalized(), 0.6));
  const Vec3d vc(0.1, -0.2, 0.05), wc(0.3, 0.1, -0.4);
  const Twistd t = camera_to_ee_twist(r, vc, wc);
  const double dt = 1e-6;
  const RobotState n{pose_integrate(r.ee, t, dt), r.extrinsic, 0};
  const Vec3d cam_v = (n.camera().p - r.camera().p) / dt;
  CHECK((cam_v - r.camera().q.rotate(vc)).norm() < 1e-6);
  CHECK((t.angular - r.camera().q.rotate(wc)).norm() < 1e-12);
}

TEST_CASE("trial config validation") {
  TrialConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.scheme = Scheme::ildvs;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  const NodeModel m = zero_model(Task::mouse);
  cfg.model = &m;
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_scheme("IlDvS") == Scheme::ildvs);
  CHECK_THROWS_AS(parse_scheme("pbvs"), InvalidArgument);
}

TEST_CASE("DVS on every mouse position: converges without any yaw") {
  for (const char* pos : PositionGrid::kNames) {
    TrialConfig cfg;
    cfg.task = Task::mouse;
    cfg.position = pos;
    const TrialResult r = run_trial(cfg);
    CHECK(r.termination == "horizon");
    CHECK(r.eta_series.size() == static_cast<std::size_t>(r.steps) + 1);
    CHECK(r.eta_final < 0.01);
    CHECK(std::abs(r.epsilon - r.epsilon_start) < 1e-3);
    double wz = 0;
    for (double w : r.omega_z) wz = std::max(wz, std::abs(w));
    CHECK(wz < 1e-9);
    CHECK(r.delta.has_value() == (std::string(pos) == "center"));
  }
}

TEST_CASE("ILDVS with a silent imitator reduces to translational servoing") {
  const NodeModel m = zero_model(Task::mouse);
  TrialConfig cfg;
  cfg.task = Task::mouse;
  cfg.scheme = Scheme::ildvs;
  cfg.model = &m;
  const TrialResult r = run_trial(cfg);
  CHECK(r.termination == "horizon");
  CHECK(r.eta_final < 0.01);
  CHECK(std::abs(r.epsilon - r.epsilon_start) < 1e-9);
}

TEST_CASE("IIL ignores the detector and follows the imitator") {
  NodeModel m = zero_model(Task::mouse);
  m.params.layers[1].b[4] = 1.0;  // +1 cm/s in x
  TrialConfig cfg;
  cfg.task = Task::mouse;
  cfg.scheme = Scheme::iil;
  cfg.model = &m;
  cfg.horizon = 60;
  const TrialResult r = run_trial(cfg);
  CHECK(r.steps == 60);
  TrialConfig d = cfg;
  d.horizon = 1;
  const TrialResult r0 = run_trial(d);
  CHECK(r.final_ee.p.x() - r0.final_ee.p.x() == doctest::Approx(0.01 * 59 / 30.0).epsilon(1e-9));
}

TEST_CASE("trials are reproducible and vary across trial indices") {
  TrialConfig cfg;
  cfg.task = Task::cup;
  cfg.horizon = 40;
  const TrialResult a = run_trial(cfg), b = run_trial(cfg);
  CHECK(a.eta_series == b.eta_series);
  cfg.trial = 2;
  CHECK(run_trial(cfg).eta_series != a.eta_series);
}

TEST_CASE("workspace violation is recorded, not thrown") {
  NodeModel m = zero_model(Task::mouse);
  m.params.layers[1].b[6] = -500.0;  // dive at 5 m/s
  TrialConfig cfg;
  cfg.task = Task::mouse;
  cfg.scheme = Scheme::iil;
  cfg.model = &m;
  const TrialResult r = run_trial(cfg);
  CHECK(r.termination == "workspace_violation");
  CHECK(r.steps < cfg.horizon);
  CHECK(r.eta_series.size() == static_cast<std::size_t>(r.steps) + 1);
}

TEST_CASE("results CSV round trip") {
  TrialConfig cfg;
  cfg.task = Task::cup;
  cfg.horizon = 20;
  std::vector<TrialResult> rs;
  for (const char* pos : {"center", "N3"}) {
    cfg.position = pos;
    rs.push_back(run_trial(cfg));
  }
  std::stringstream ss;
  write_results_header(ss);
  for (const auto& r : rs) write_result_row(ss, r);
  const std::string text = ss.str();
  CHECK(text.rfind("task,scheme,position,trial,steps,eta_final,delta,epsilon,success,termination", 0) == 0);
  const auto back = read_results(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].eta_final == rs[0].eta_final);
  CHECK(back[0].delta.has_value());
  CHECK(*back[0].delta == *rs[0].delta);
  CHECK_FALSE(back[1].delta.has_value());
  CHECK(*back[1].success == *rs[1].success);
  CHECK(back[1].termination == rs[1].termination);
  std::stringstream series;
  write_eta_series(series, rs[0]);
  CHECK(series.str().rfind("step,eta\n0,", 0) == 0);
  CHECK(eta_series_filename(rs[1]) == "eta_cup_DVS_N3_t1.csv");
}

TEST_CASE("protocol ordering and count") {
  ProtocolConfig pc;
  pc.base.task = Task::mouse;
  pc.base.horizon = 5;
  pc.schemes = {Scheme::dvs};
  int calls = 0;
  const auto rs = run_protocol(pc, [&](const TrialResult&, bool reused) {
    CHECK_FALSE(reused);
    ++calls;
  });
  REQUIRE(rs.size() == 15);
  CHECK(calls == 15);
  CHECK(rs[0].position == "center");
  CHECK(rs[2].trial == 3);
  CHECK(rs[3].position == "N1");
  pc.lookup = [&](const TrialConfig& t) -> std::optional<TrialResult> {
    if (t.position == "center") return rs[t.trial - 1];
    return std::nullopt;
  };
  int reused = 0;
  run_protocol(pc, [&](const TrialResult&, bool r) { reused += r; });
  CHECK(reused == 3);
}
