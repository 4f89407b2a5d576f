#include "ildvs/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ildvs {

void CameraIntrinsics::validate() const {
  if (!(fu > 0 && fv > 0)) throw InvalidArgument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
}

Vec3d SceneObject::centroid_world() const {
  Vec3d c = Vec3d::Zero();
  for (const auto& m : model_points) c += m;
  return pose.transform(c / static_cast<double>(model_points.size()));
}

SceneObject make_box(const std::string& label, double sx, double sy, double sz) {
  SceneObject obj;
  obj.label = label;
  for (int k = 0; k < 8; ++k) {
    obj.model_points.emplace_back((k & 1 ? 0.5 : -0.5) * sx, (k & 2 ? 0.5 : -0.5) * sy,
                                  (k & 4 ? sz : 0.0));
  }
  return obj;
}

SceneObject make_cylinder(const std::string& label, double radius, double height,
                          int samples) {
  SceneObject obj;
  obj.label = label;
  for (double z : {height, 0.0}) {
    for (int k = 0; k < samples; ++k) {
      const double a = 2.0 * std::numbers::pi * k / samples;
      obj.model_points.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  return obj;
}

const char* to_string(FeatureUnit unit) {
  switch (unit) {
    case FeatureUnit::pixel: return "pixel";
    case FeatureUnit::normalized_metric: return "normalized_metric";
    case FeatureUnit::scaled_0_100: return "scaled_0_100";
  }
  return "?";
}

const char* to_string(FeatureArity arity) {
  return arity == FeatureArity::ul_lr_4 ? "UL_LR_4" : "corners_8";
}

FeatureVec::FeatureVec(Eigen::VectorXd v, FeatureUnit u, FeatureArity a)
    : values(std::move(v)), unit(u), arity(a) {
  const Eigen::Index expected = a == FeatureArity::ul_lr_4 ? 4 : 8;
  if (values.size() != expected) {
    throw InvalidArgument("feature vector of arity " + std::string(to_string(a)) +
                          " needs " + std::to_string(expected) + " values");
  }
}

void FeatureVec::require_same_kind(const FeatureVec& other) const {
  if (!same_kind(other)) {
    throw UnitMismatch(std::string(to_string(unit)) + "/" + to_string(arity) + " vs " +
                       to_string(other.unit) + "/" + to_string(other.arity));
  }
}

FeatureVec operator-(const FeatureVec& a, const FeatureVec& b) {
  a.require_same_kind(b);
  return FeatureVec(a.values - b.values, a.unit, a.arity);
}

Eigen::Vector2d project(const CameraIntrinsics& intr, const Posed& cam_pose,
                        const Vec3d& point_w) {
  const Vec3d pc = cam_pose.inverse_transform(point_w);
  if (!(pc.z() > kMinDepth)) {
    throw BehindCamera("camera-frame depth " + std::to_string(pc.z()));
  }
  return {intr.fu * pc.x() / pc.z() + intr.cu, intr.fv * pc.y() / pc.z() + intr.cv};
}

std::vector<Detection> detect(const std::vector<SceneObject>& scene, const Posed& cam_pose,
                              const CameraIntrinsics& intr, double noise_px,
                              std::mt19937_64& rng) {
  if (scene.empty()) throw NoDetection("empty scene");
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::vector<Detection> out;
  for (const auto& obj : scene) {
    double noise[4];
    for (double& n : noise) n = noise_px * jitter(rng);

    const double inf = std::numeric_limits<double>::infinity();
    BBox b{inf, inf, -inf, -inf};
    int visible = 0;
    for (std::size_t i = 0; i < obj.model_points.size(); ++i) {
      const Vec3d pc = cam_pose.inverse_transform(obj.world_point(i));
      if (!(pc.z() > kMinDepth)) continue;
      const double u = intr.fu * pc.x() / pc.z() + intr.cu;
      const double v = intr.fv * pc.y() / pc.z() + intr.cv;
      if (u < 0 || u > intr.width || v < 0 || v > intr.height) continue;
      b.u_min = std::min(b.u_min, u);
      b.u_max = std::max(b.u_max, u);
      b.v_min = std::min(b.v_min, v);
      b.v_max = std::max(b.v_max, v);
      ++visible;
    }
    if (visible == 0) continue;
    b.u_min += noise[0];
    b.v_min += noise[1];
    b.u_max += noise[2];
    b.v_max += noise[3];
    // A single visible point (or heavy noise) can collapse the box; keep it valid.
    if (!(b.u_max > b.u_min)) std::swap(b.u_min, b.u_max), b.u_max += 1e-6;
    if (!(b.v_max > b.v_min)) std::swap(b.v_min, b.v_max), b.v_max += 1e-6;
    out.push_back({obj.label, b});
  }
  if (out.empty()) throw NoDetection("no object projects inside the image");
  return out;
}

BBox select_label(const std::vector<Detection>& detections, const std::string& target) {
  const Detection* best = nullptr;
  for (const auto& d : detections) {
    if (d.label != target) continue;
    if (!best || d.box.area() > best->box.area() ||
        (d.box.area() == best->box.area() && d.box.u_min < best->box.u_min)) {
      best = &d;
    }
  }
  if (!best) throw LabelNotFound("no detection labelled '" + target + "'");
  return best->box;
}

BBox squarify(const BBox& b) {
  const double half = 0.5 * std::max(b.width(), b.height());
  const Eigen::Vector2d c = b.center();
  return {c.x() - half, c.y() - half, c.x() + half, c.y() + half};
}

FilterState::FilterState(std::size_t window) : window_(window) {
  if (window == 0) throw InvalidArgument("filter window must be at least 1");
}

FeatureVec smooth(FilterState& state, const FeatureVec& f) {
  if (!state.buffer_.empty()) state.buffer_.front().require_same_kind(f);
  state.buffer_.push_back(f);
  if (state.buffer_.size() > state.window_) state.buffer_.pop_front();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f.values.size());
  for (const auto& x : state.buffer_) sum += x.values;
  return FeatureVec(sum / static_cast<double>(state.buffer_.size()), f.unit, f.arity);
}

FeatureVec to_pixel_corners(const BBox& b) {
  Eigen::VectorXd v(8);
  v << b.u_min, b.v_min, b.u_max, b.v_min, b.u_max, b.v_max, b.u_min, b.v_max;
  return FeatureVec(std::move(v), FeatureUnit::pixel, FeatureArity::corners_8);
}

BBox bbox_from_corners(const FeatureVec& f) {
  if (f.unit != FeatureUnit::pixel || f.arity != FeatureArity::corners_8) {
    throw UnitMismatch("bbox_from_corners expects pixel corners_8");
  }
  return {f.values[0], f.values[1], f.values[4], f.values[5]};
}

FeatureVec to_features8(const BBox& b, const CameraIntrinsics& intr) {
  FeatureVec px = to_pixel_corners(b);
  Eigen::VectorXd v(8);
  for (int i = 0; i < 4; ++i) {
    v[2 * i] = (px.values[2 * i] - intr.cu) / intr.fu;
    v[2 * i + 1] = (px.values[2 * i + 1] - intr.cv) / intr.fv;
  }
  return FeatureVec(std::move(v), FeatureUnit::normalized_metric, FeatureArity::corners_8);
}

FeatureVec to_pixels(const FeatureVec& f, const CameraIntrinsics& intr) {
  if (f.unit != FeatureUnit::normalized_metric) {
    throw UnitMismatch("to_pixels expects normalized_metric features");
  }
  Eigen::VectorXd v(f.values.size());
  for (Eigen::Index i = 0; i < v.size(); i += 2) {
    v[i] = f.values[i] * intr.fu + intr.cu;
    v[i + 1] = f.values[i + 1] * intr.fv + intr.cv;
  }
  return FeatureVec(std::move(v), FeatureUnit::pixel, f.arity);
}

FeatureVec to_features4(const BBox& b, const CameraIntrinsics& intr) {
  const double w = intr.width, h = intr.height;
  Eigen::VectorXd v(4);
  v << std::clamp(b.u_min, 0.0, w) / w, std::clamp(b.v_min, 0.0, h) / h,
      std::clamp(b.u_max, 0.0, w) / w, std::clamp(b.v_max, 0.0, h) / h;
  return FeatureVec(100.0 * v, FeatureUnit::scaled_0_100, FeatureArity::ul_lr_4);
}

}  // namespace ildvs
