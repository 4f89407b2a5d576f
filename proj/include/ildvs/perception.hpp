#pragma once

// Pinhole projection, an orientation-blind bounding-box detector emulator, and
// the feature post-processing chain: label selection, squarification, temporal
// averaging and conversion to control / learning feature vectors.

#include <Eigen/Core>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "ildvs/geom3d.hpp"

namespace ildvs {

struct CameraIntrinsics {
  double fu = 500.0;
  double fv = 500.0;
  double cu = 320.0;
  double cv = 240.0;
  int width = 640;
  int height = 480;

  void validate() const;
};

struct SceneObject {
  std::string label;
  std::vector<Vec3d> model_points;  // object frame, meters
  Posed pose;                       // object frame in world

  Vec3d world_point(std::size_t i) const { return pose.transform(model_points[i]); }
  Vec3d centroid_world() const;
};

// Box resting on the object origin plane: x in [-sx/2, sx/2], y likewise, z in [0, sz].
SceneObject make_box(const std::string& label, double sx, double sy, double sz);
// Cylinder of the given radius standing on z = 0: `samples` rim and `samples` base points.
SceneObject make_cylinder(const std::string& label, double radius, double height,
                          int samples = 16);

struct BBox {
  double u_min = 0, v_min = 0, u_max = 0, v_max = 0;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }
  Eigen::Vector2d center() const {
    return {0.5 * (u_min + u_max), 0.5 * (v_min + v_max)};
  }
  bool valid() const { return u_min < u_max && v_min < v_max; }
  bool operator==(const BBox&) const = default;
};

struct Detection {
  std::string label;
  BBox box;
};

enum class FeatureUnit { pixel, normalized_metric, scaled_0_100 };
enum class FeatureArity { ul_lr_4, corners_8 };

const char* to_string(FeatureUnit unit);
const char* to_string(FeatureArity arity);

// Bounding-box features with explicit unit and arity tags; arithmetic between
// two vectors is only defined when both tags agree.
struct FeatureVec {
  Eigen::VectorXd values;
  FeatureUnit unit = FeatureUnit::pixel;
  FeatureArity arity = FeatureArity::corners_8;

  FeatureVec() = default;
  FeatureVec(Eigen::VectorXd v, FeatureUnit u, FeatureArity a);

  bool same_kind(const FeatureVec& other) const {
    return unit == other.unit && arity == other.arity;
  }
  void require_same_kind(const FeatureVec& other) const;
};

FeatureVec operator-(const FeatureVec& a, const FeatureVec& b);

// Pinhole projection of a world point. Throws BehindCamera when the camera-frame
// depth is not above kMinDepth.
inline constexpr double kMinDepth = 1e-4;
Eigen::Vector2d project(const CameraIntrinsics& intr, const Posed& cam_pose,
                        const Vec3d& point_w);

// Emulated detector: one axis-aligned box per object around its visible
// projected model points, each side jittered by U(-noise_px, noise_px).
// Four noise draws are consumed per object per call whether or not the object
// is visible, so the noise stream depends only on the call sequence.
std::vector<Detection> detect(const std::vector<SceneObject>& scene, const Posed& cam_pose,
                              const CameraIntrinsics& intr, double noise_px,
                              std::mt19937_64& rng);

// Box carrying `target`; among duplicates the largest area wins, then the
// smallest u_min.
BBox select_label(const std::vector<Detection>& detections, const std::string& target);

// Concentric square with side max(width, height). No clamping to the image.
BBox squarify(const BBox& b);

class FilterState {
 public:
  explicit FilterState(std::size_t window = 50);

  std::size_t window() const { return window_; }
  std::size_t size() const { return buffer_.size(); }
  bool empty() const { return buffer_.empty(); }
  const std::deque<FeatureVec>& buffer() const { return buffer_; }

 private:
  friend FeatureVec smooth(FilterState& state, const FeatureVec& f);
  std::size_t window_;
  std::deque<FeatureVec> buffer_;
};

// Pushes f and returns the mean of the buffered entries.
FeatureVec smooth(FilterState& state, const FeatureVec& f);

// Corners UL, UR, LR, LL in pixels.
FeatureVec to_pixel_corners(const BBox& b);
// Inverse of to_pixel_corners (reads UL and LR).
BBox bbox_from_corners(const FeatureVec& pixel_corners);

// Corners UL, UR, LR, LL as normalized metric coordinates ((u-cu)/fu, (v-cv)/fv).
FeatureVec to_features8(const BBox& b, const CameraIntrinsics& intr);
// Normalized metric corners back to pixels.
FeatureVec to_pixels(const FeatureVec& normalized, const CameraIntrinsics& intr);

// (u_UL/W, v_UL/H, u_LR/W, v_LR/H) * 100 after clamping the corners to the image.
FeatureVec to_features4(const BBox& b, const CameraIntrinsics& intr);

}  // namespace ildvs
