#pragma once

// NodeModel persistence as a JSON document. Field names:
//   format ("ildvs-node-checkpoint"), version, task,
//   architecture {layer_sizes, activations}, weights [[row-major W]], biases [[b]],
//   integrator, dt, seed, anchor {w,x,y,z},
//   scaling {position: 100 (cm per m), rotation: 100},
//   train_config {iterations, learning_rate, segment_length, beta1, beta2, adam_eps}.
// Doubles are written in shortest round-trip form, so save/load is lossless.

#include <iosfwd>
#include <string>

#include "ildvs/node.hpp"

namespace ildvs {

void save_checkpoint(std::ostream& out, const NodeModel& model);
void save_checkpoint(const std::string& path, const NodeModel& model);

// Throws ParseError on malformed documents and UnitMismatch when the stored
// scaling constants differ from the library's.
NodeModel load_checkpoint(std::istream& in);
NodeModel load_checkpoint(const std::string& path);

}  // namespace ildvs
