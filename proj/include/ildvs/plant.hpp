#pragma once

// Point-feature eye-in-hand plant for closed-loop checks of the servo laws.
// Four 3D points are expressed in the camera frame and move under the camera
// twist (v, w) as dP/dt = -v - w x P; the features are their normalized
// projections (x, y) = (X/Z, Y/Z) stacked as 8 values.

#include <Eigen/Dense>

#include "ildvs/servo.hpp"

namespace ildvs {

template <typename Scalar>
struct PointPlant {
  using Points = Eigen::Matrix<Scalar, 3, 4>;
  using Features = Eigen::Matrix<Scalar, 8, 1>;
  using Velocity = Eigen::Matrix<Scalar, 6, 1>;

  Points points = Points::Zero();  // camera frame, one column per point

  Features features() const {
    Features s;
    for (int i = 0; i < 4; ++i) {
      if (!(points(2, i) > Scalar(kMinDepth))) throw BehindCamera("plant point behind the camera");
      s[2 * i] = points(0, i) / points(2, i);
      s[2 * i + 1] = points(1, i) / points(2, i);
    }
    return s;
  }

  // Interaction matrix at the true depths.
  Eigen::Matrix<Scalar, 8, 6> interaction() const {
    const Features s = features();
    Eigen::Matrix<Scalar, 8, 6> L;
    for (int i = 0; i < 4; ++i) {
      L.template middleRows<2>(2 * i) = point_interaction(s[2 * i], s[2 * i + 1], points(2, i));
    }
    return L;
  }

  Points rate(const Velocity& u) const {
    const Vec3<Scalar> v = u.template head<3>(), w = u.template tail<3>();
    Points d;
    for (int i = 0; i < 4; ++i) d.col(i) = -v - w.cross(Vec3<Scalar>(points.col(i)));
    return d;
  }
};

// Advances the plant over dt with classical RK4 substeps, re-evaluating the
// control at every stage so the loop behaves as a continuous-time controller.
// control: PointPlant<Scalar> -> 6-vector camera twist.
template <typename Scalar, typename Control>
PointPlant<Scalar> plant_step(const PointPlant<Scalar>& s, Control&& control, Scalar dt,
                              int substeps = 20) {
  if (substeps < 1) throw InvalidArgument("plant_step: substeps must be >= 1");
  const Scalar h = dt / Scalar(substeps);
  PointPlant<Scalar> x = s;
  auto f = [&](const PointPlant<Scalar>& p) { return p.rate(control(p)); };
  for (int k = 0; k < substeps; ++k) {
    PointPlant<Scalar> t = x;
    const auto k1 = f(x);
    t.points = x.points + (h / 2) * k1;
    const auto k2 = f(t);
    t.points = x.points + (h / 2) * k2;
    const auto k3 = f(t);
    t.points = x.points + h * k3;
    const auto k4 = f(t);
    x.points += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

}  // namespace ildvs
