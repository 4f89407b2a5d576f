#pragma once

// Detector adapter seam. A DetectionSource yields the detections of one camera
// frame; the emulator wraps detect(), and RecordedDetector replays a text
// stream of `frame_id label u_min v_min u_max v_max` lines produced by an
// external detector (or by write_detections below).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ildvs/perception.hpp"

namespace ildvs {

class DetectionSource {
 public:
  virtual ~DetectionSource() = default;
  // Detections for frame `frame_id` seen from `cam_pose`. Throws NoDetection
  // when the frame has none.
  virtual std::vector<Detection> frame(long frame_id, const Posed& cam_pose) = 0;
};

class EmulatedDetector : public DetectionSource {
 public:
  EmulatedDetector(std::vector<SceneObject> scene, CameraIntrinsics intr, double noise_px,
                   std::uint64_t seed);

  std::vector<Detection> frame(long frame_id, const Posed& cam_pose) override;

  const std::vector<SceneObject>& scene() const { return scene_; }
  std::vector<SceneObject>& scene() { return scene_; }

 private:
  std::vector<SceneObject> scene_;
  CameraIntrinsics intr_;
  double noise_px_;
  std::mt19937_64 rng_;
};

class RecordedDetector : public DetectionSource {
 public:
  // Throws ParseError with the offending line number.
  explicit RecordedDetector(std::istream& in);

  std::vector<Detection> frame(long frame_id, const Posed& cam_pose) override;
  std::size_t frame_count() const { return frames_.size(); }

 private:
  std::map<long, std::vector<Detection>> frames_;
};

void write_detections(std::ostream& out, long frame_id, const std::vector<Detection>& dets);

}  // namespace ildvs
