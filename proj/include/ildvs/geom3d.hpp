#pragma once

// Rotation and pose algebra on top of Eigen: canonical unit quaternions,
// rotation-vector log/exp maps, tangent coordinates anchored at a reference
// orientation, and first-order twist integration.
//
// Conventions:
//   * Rotation vectors are axis * angle (radians), not the half-angle log.
//   * Quaternions are kept in the hemisphere w >= 0.
//   * Twists are world-frame: v is the velocity of the pose origin and omega
//     the angular velocity, both expressed in the world (robot base) frame.

#include <Eigen/Geometry>
#include <cmath>

#include "ildvs/errors.hpp"

namespace ildvs {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using RotVec = Vec3<Scalar>;

// Below this rotation angle log/exp switch to their Taylor expansions.
inline constexpr double kSmallAngle = 1e-8;

template <typename Scalar>
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(Eigen::Quaternion<Scalar>::Identity()) {}

  UnitQuaternion(Scalar w, Scalar x, Scalar y, Scalar z)
      : UnitQuaternion(Eigen::Quaternion<Scalar>(w, x, y, z)) {}

  explicit UnitQuaternion(const Eigen::Quaternion<Scalar>& q) : q_(q) {
    const Scalar n = q_.norm();
    if (!std::isfinite(n) || n <= Scalar(0)) {
      throw InvalidArgument("quaternion must be finite and non-zero");
    }
    q_.coeffs() /= n;
    if (q_.w() < Scalar(0)) q_.coeffs() = -q_.coeffs();
  }

  static UnitQuaternion identity() { return UnitQuaternion(); }

  static UnitQuaternion from_axis_angle(const Vec3<Scalar>& axis, Scalar angle) {
    return UnitQuaternion(Eigen::Quaternion<Scalar>(
        Eigen::AngleAxis<Scalar>(angle, axis.normalized())));
  }

  static UnitQuaternion from_rotation(const Mat3<Scalar>& R) {
    return UnitQuaternion(Eigen::Quaternion<Scalar>(R));
  }

  Scalar w() const { return q_.w(); }
  Scalar x() const { return q_.x(); }
  Scalar y() const { return q_.y(); }
  Scalar z() const { return q_.z(); }
  Vec3<Scalar> vec() const { return q_.vec(); }

  const Eigen::Quaternion<Scalar>& eigen() const { return q_; }
  Mat3<Scalar> rotation() const { return q_.toRotationMatrix(); }
  Vec3<Scalar> rotate(const Vec3<Scalar>& p) const { return q_ * p; }

  UnitQuaternion conjugate() const { return UnitQuaternion(q_.conjugate()); }

 private:
  Eigen::Quaternion<Scalar> q_;
};

// Hamilton product, renormalized onto the w >= 0 hemisphere.
template <typename Scalar>
UnitQuaternion<Scalar> quat_mul(const UnitQuaternion<Scalar>& a,
                                const UnitQuaternion<Scalar>& b) {
  return UnitQuaternion<Scalar>(a.eigen() * b.eigen());
}

template <typename Scalar>
UnitQuaternion<Scalar> operator*(const UnitQuaternion<Scalar>& a,
                                 const UnitQuaternion<Scalar>& b) {
  return quat_mul(a, b);
}

// Rotation vector u * theta of q = (cos(theta/2), u sin(theta/2)), theta in [0, pi].
template <typename Scalar>
RotVec<Scalar> quat_log(const UnitQuaternion<Scalar>& q) {
  const Vec3<Scalar> v = q.vec();
  const Scalar n = v.norm();
  const Scalar w = q.w();
  if (Scalar(2) * n < Scalar(kSmallAngle)) {
    // 2 atan(n/w) / n ~ (2/w) (1 - n^2 / (3 w^2))
    return v * (Scalar(2) / w) * (Scalar(1) - n * n / (Scalar(3) * w * w));
  }
  return v * (Scalar(2) * std::atan2(n, w) / n);
}

template <typename Scalar>
UnitQuaternion<Scalar> quat_exp(const RotVec<Scalar>& r) {
  const Scalar theta = r.norm();
  if (!std::isfinite(theta)) throw InvalidArgument("rotation vector must be finite");
  if (theta < Scalar(kSmallAngle)) {
    const Scalar t2 = theta * theta;
    const Scalar c = Scalar(1) - t2 / Scalar(8);
    const Scalar s = Scalar(0.5) - t2 / Scalar(48);
    return UnitQuaternion<Scalar>(c, s * r.x(), s * r.y(), s * r.z());
  }
  const Scalar s = std::sin(theta / Scalar(2)) / theta;
  return UnitQuaternion<Scalar>(std::cos(theta / Scalar(2)), s * r.x(), s * r.y(),
                                s * r.z());
}

// Shortest-rotation representative (norm <= pi) of an arbitrary rotation vector.
template <typename Scalar>
RotVec<Scalar> canonicalize(const RotVec<Scalar>& r) {
  return quat_log(quat_exp(r));
}

// Coordinates of q in the tangent space placed at anchor: log(q * conj(anchor)).
template <typename Scalar>
RotVec<Scalar> tangent_coords(const UnitQuaternion<Scalar>& q,
                              const UnitQuaternion<Scalar>& anchor) {
  return quat_log(quat_mul(q, anchor.conjugate()));
}

template <typename Scalar>
UnitQuaternion<Scalar> from_tangent_coords(const RotVec<Scalar>& r,
                                           const UnitQuaternion<Scalar>& anchor) {
  return quat_mul(quat_exp(r), anchor);
}

template <typename Scalar>
Scalar geodesic_angle(const UnitQuaternion<Scalar>& a, const UnitQuaternion<Scalar>& b) {
  return tangent_coords(a, b).norm();
}

// Spherical interpolation along the shortest arc, s in [0, 1].
template <typename Scalar>
UnitQuaternion<Scalar> slerp(const UnitQuaternion<Scalar>& from,
                             const UnitQuaternion<Scalar>& to, Scalar s) {
  return quat_mul(quat_exp<Scalar>(s * tangent_coords(to, from)), from);
}

template <typename Scalar>
struct Twist {
  Vec3<Scalar> linear = Vec3<Scalar>::Zero();
  Vec3<Scalar> angular = Vec3<Scalar>::Zero();

  Twist() = default;
  Twist(const Vec3<Scalar>& v, const Vec3<Scalar>& w) : linear(v), angular(w) {}

  static Twist from_vector(const Eigen::Matrix<Scalar, 6, 1>& x) {
    return Twist(x.template head<3>(), x.template tail<3>());
  }
  Eigen::Matrix<Scalar, 6, 1> vector() const {
    Eigen::Matrix<Scalar, 6, 1> x;
    x << linear, angular;
    return x;
  }
  bool finite() const { return linear.allFinite() && angular.allFinite(); }
};

template <typename Scalar>
struct Pose {
  Vec3<Scalar> p = Vec3<Scalar>::Zero();
  UnitQuaternion<Scalar> q;

  Pose() = default;
  Pose(const Vec3<Scalar>& position, const UnitQuaternion<Scalar>& orientation)
      : p(position), q(orientation) {}

  Vec3<Scalar> transform(const Vec3<Scalar>& local) const { return p + q.rotate(local); }
  Vec3<Scalar> inverse_transform(const Vec3<Scalar>& world) const {
    return q.conjugate().rotate(world - p);
  }
};

// a o b: the pose b expressed in a's frame, mapped to a's parent frame.
template <typename Scalar>
Pose<Scalar> compose(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  return Pose<Scalar>(a.transform(b.p), quat_mul(a.q, b.q));
}

template <typename Scalar>
Pose<Scalar> inverse(const Pose<Scalar>& a) {
  const UnitQuaternion<Scalar> qi = a.q.conjugate();
  return Pose<Scalar>(-qi.rotate(a.p), qi);
}

// p' = p + v dt, q' = exp(omega dt) * q.
template <typename Scalar>
Pose<Scalar> pose_integrate(const Pose<Scalar>& pose, const Twist<Scalar>& twist,
                            Scalar dt) {
  if (!(dt > Scalar(0))) throw InvalidArgument("pose_integrate: dt must be positive");
  return Pose<Scalar>(pose.p + twist.linear * dt,
                      quat_mul(quat_exp<Scalar>(twist.angular * dt), pose.q));
}

// World-frame twist that carries `from` onto `to` in exactly one step of dt.
template <typename Scalar>
Twist<Scalar> twist_between(const Pose<Scalar>& from, const Pose<Scalar>& to, Scalar dt) {
  return Twist<Scalar>((to.p - from.p) / dt, quat_log(quat_mul(to.q, from.q.conjugate())) / dt);
}

using Quatd = UnitQuaternion<double>;
using Posed = Pose<double>;
using Twistd = Twist<double>;
using Vec3d = Vec3<double>;

}  // namespace ildvs
