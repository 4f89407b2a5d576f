#include "ildvs/detection_stream.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace ildvs {

EmulatedDetector::EmulatedDetector(std::vector<SceneObject> scene, CameraIntrinsics intr,
                                   double noise_px, std::uint64_t seed)
    : scene_(std::move(scene)), intr_(intr), noise_px_(noise_px), rng_(seed) {
  intr_.validate();
  if (!(noise_px >= 0)) throw InvalidArgument("noise amplitude must be non-negative");
}

std::vector<Detection> EmulatedDetector::frame(long, const Posed& cam_pose) {
  return detect(scene_, cam_pose, intr_, noise_px_, rng_);
}

RecordedDetector::RecordedDetector(std::istream& in) {
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long id;
    Detection d;
    if (!(ss >> id >> d.label >> d.box.u_min >> d.box.v_min >> d.box.u_max >> d.box.v_max)) {
      throw ParseError("expected 'frame_id label u_min v_min u_max v_max'", lineno);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("trailing field '" + extra + "'", lineno);
    if (!d.box.valid()) throw ParseError("box corners out of order", lineno);
    frames_[id].push_back(std::move(d));
  }
}

std::vector<Detection> RecordedDetector::frame(long frame_id, const Posed&) {
  auto it = frames_.find(frame_id);
  if (it == frames_.end()) throw NoDetection("no record for frame " + std::to_string(frame_id));
  return it->second;
}

void write_detections(std::ostream& out, long frame_id, const std::vector<Detection>& dets) {
  char buf[160];
  for (const auto& d : dets) {
    std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g %.17g\n", d.box.u_min, d.box.v_min,
                  d.box.u_max, d.box.v_max);
    out << frame_id << ' ' << d.label << buf;
  }
}

}  // namespace ildvs
