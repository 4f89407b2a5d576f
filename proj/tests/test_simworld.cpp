#include <cmath>
#include <random>

#include "doctest.h"
#include "ildvs/simworld.hpp"

using namespace ildvs;

TEST_CASE("step oracles") {
  const World w = make_world(Task::mouse, Vec3d(0.5, 0, 0), "center");
  RobotState r;
  r.ee = Posed(Vec3d(0.5, 0, 0.4), look_down_orientation());
  const RobotState same = step(w, r, Twistd(), 0.1);
  CHECK((same.ee.p - r.ee.p).norm() == 0.0);
  CHECK(same.time == doctest::Approx(0.1));
  RobotState moving = r;
  const Vec3d v(0.05, -0.02, 0.01);
  for (int k = 0; k < 30; ++k) moving = step(w, moving, Twistd(v, Vec3d::Zero()), 1.0 / 30);
  CHECK((moving.ee.p - r.ee.p - v).norm() < 1e-12);
  CHECK_THROWS_AS(step(w, r, Twistd(Vec3d(0, 0, -1), Vec3d::Zero()), 1.0), WorkspaceViolation);
  const double nan = std::nan("");
  CHECK_THROWS_AS(step(w, r, Twistd(Vec3d(nan, 0, 0), Vec3d::Zero()), 0.1), WorkspaceViolation);
}

TEST_CASE("camera pose is ee pose composed with the extrinsic") {
  RobotState r;
  r.ee = Posed(Vec3d(0.3, 0.2, 0.5), Quatd::from_axis_angle(Vec3d(1, 1, 0).normalized(), 0.8));
  const Posed c = r.camera();
  const Posed expect = compose(r.ee, r.extrinsic);
  CHECK(c.p == expect.p);
  CHECK(c.q.eigen().coeffs() == expect.q.eigen().coeffs());
  CHECK((c.p - r.ee.p).norm() == doctest::Approx(r.extrinsic.p.norm()));
}

TEST_CASE("position grid") {
  const PositionGrid g = make_grid(Vec3d(0.5, 0, 0));
  CHECK((g.position("N1") - Vec3d(0.65, 0, 0)).norm() < 1e-15);
  CHECK((g.position("N2") - Vec3d(0.35, 0, 0)).norm() < 1e-15);
  CHECK((g.position("N3") - Vec3d(0.5, 0.15, 0)).norm() < 1e-15);
  CHECK((g.position("N4") - Vec3d(0.5, -0.15, 0)).norm() < 1e-15);
  for (const char* id : PositionGrid::kNames) {
    CHECK(g.position(id).z() == 0.0);
    if (!g.is_trained(id)) CHECK((g.position(id) - g.center).norm() == doctest::Approx(0.15).epsilon(1e-12));
  }
  CHECK(g.is_trained("center"));
  CHECK_THROWS_AS(g.position("N5"), InvalidArgument);
}

TEST_CASE("worlds carry the labelled target and clutter") {
  const World m = make_world(Task::mouse, Vec3d(0.5, 0, 0), "center");
  CHECK(m.active().label == "mouse");
  CHECK(m.objects.size() == 1);
  const World c = make_world(Task::cup, Vec3d(0.65, 0, 0), "N1");
  CHECK(c.active().label == "cup");
  CHECK(c.objects.size() == 3);
  CHECK(c.active().pose.p.x() == doctest::Approx(0.65));
  CHECK(parse_task("cup") == Task::cup);
  CHECK_THROWS_AS(parse_task("plate"), InvalidArgument);
}

TEST_CASE("task orientations") {
  const Mat3<double> R = look_down_orientation().rotation();
  CHECK((R.col(2) - Vec3d(0, 0, -1)).norm() < 1e-15);
  const Mat3<double> S = look_along_x_orientation().rotation();
  CHECK((S.col(2) - Vec3d(1, 0, 0)).norm() < 1e-15);
  const ExpertTask mt = make_task(Task::mouse, Vec3d(0.5, 0, 0));
  CHECK(geodesic_angle(mt.nominal_start.q, mt.goal.q) == doctest::Approx(std::acos(-1.0) / 2));
  const ExpertTask ct = make_task(Task::cup, Vec3d(0.5, 0, 0));
  CHECK(geodesic_angle(ct.nominal_start.q, ct.goal.q) == doctest::Approx(std::acos(-1.0) / 2));
  CHECK(ct.via.has_value());
}

TEST_CASE("expert path end points and velocity") {
  const Posed a(Vec3d(0, 0, 0.5), Quatd());
  const Posed b(Vec3d(0.2, 0.1, 0.4), Quatd::from_axis_angle(Vec3d::UnitZ(), 1.0));
  const ExpertPath path(a, b, Vec3d(0.1, 0.3, 0.6), 2.0);
  CHECK((path.pose(0).p - a.p).norm() < 1e-15);
  CHECK((path.pose(2.0).p - b.p).norm() < 1e-15);
  CHECK((path.pose(5.0).p - b.p).norm() == 0.0);
  CHECK(path.linear_velocity(0).norm() == 0.0);
  CHECK(path.linear_velocity(2.5).norm() == 0.0);
  const double t = 0.7, h = 1e-6;
  const Vec3d fd = (path.pose(t + h).p - path.pose(t - h).p) / (2 * h);
  CHECK((fd - path.linear_velocity(t)).norm() < 1e-7);
  CHECK_THROWS_AS(ExpertPath(a, b, std::nullopt, 0.0), InvalidArgument);
}

TEST_CASE("demonstrations: end points, bounds and diversity") {
  for (Task task : {Task::mouse, Task::cup}) {
    const Vec3d c(0.5, 0, 0);
    std::vector<Posed> starts;
    const Demonstrations d = collect_demos(task, c, 4, 500, 1.0 / 30, DetectionConfig{}, 7, {}, &starts);
    CHECK(d.count() == 4);
    CHECK(d.length() == 500);
    CHECK_NOTHROW(d.validate());
    const ExpertTask et = make_task(task, c);
    for (const auto& s : d.sequences) {
      CHECK((s.col(499).segment<3>(4) - 100 * et.goal.p).norm() < 1e-6);
      CHECK(s.topRows(4).minCoeff() >= 0.0);
      CHECK(s.topRows(4).maxCoeff() <= 100.0);
    }
    CHECK(d.sequences[0].col(499).segment<3>(7).norm() < 1e-9);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        CHECK((starts[i].p - starts[j].p).norm() > 0);
        CHECK((d.sequences[i] - d.sequences[j]).norm() > 0);
      }
  }
}

TEST_CASE("demonstrations are reproducible from the seed") {
  const auto a = collect_demos(Task::cup, Vec3d(0.5, 0, 0), 2, 60, 1.0 / 30, DetectionConfig{}, 3);
  const auto b = collect_demos(Task::cup, Vec3d(0.5, 0, 0), 2, 60, 1.0 / 30, DetectionConfig{}, 3);
  CHECK(a.sequences[1] == b.sequences[1]);
  const auto c = collect_demos(Task::cup, Vec3d(0.5, 0, 0), 2, 60, 1.0 / 30, DetectionConfig{}, 4);
  CHECK(a.sequences[1] != c.sequences[1]);
}

TEST_CASE("recorded positions finite-difference to the expert velocity at first order") {
  // The robot tracks path.pose((k+1) dt) exactly, so (p_{k+1} - p_k)/dt is the
  // secant of the path; its defect to the analytic velocity halves with dt.
  auto defect = [](double dt) {
    const World w = make_world(Task::cup, Vec3d(0.5, 0, 0), "center");
    const ExpertTask et = make_task(Task::cup, Vec3d(0.5, 0, 0));
    const int steps = static_cast<int>(std::lround(500 * (1.0 / 30) / dt));
    std::mt19937_64 rng(2);
    const DemoRecord rec = expert_demo(w, et, steps, dt, DetectionConfig{}, rng);
    const ExpertPath path(rec.start, et.goal, et.via, et.motion_fraction * steps * dt);
    double worst = 0;
    for (int k = 0; k + 1 < steps; ++k) {
      const Vec3d fd = (rec.poses[k + 1].p - rec.poses[k].p) / dt;
      worst = std::max(worst, (fd - path.linear_velocity(k * dt)).norm());
    }
    return worst;
  };
  const double d1 = defect(1.0 / 30), d2 = defect(1.0 / 60), d3 = defect(1.0 / 120);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(d2 / d3 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("object leaving the image aborts a demonstration") {
  TaskGeometry g;
  g.mouse_start_offset = Vec3d(0.4, 0, 0.2);
  CHECK_THROWS_AS(collect_demos(Task::mouse, Vec3d(0.5, 0, 0), 1, 50, 1.0 / 30, DetectionConfig{}, 1, g),
                  ObjectOutOfView);
}
