#include "ildvs/checkpoint.hpp"

#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace ildvs {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "ildvs-node-checkpoint";
constexpr int kVersion = 1;

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what(), 0);
  }
}

}  // namespace

void save_checkpoint(std::ostream& out, const NodeModel& model) {
  const auto& layers = model.params.layers;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["task"] = model.task;
  std::vector<std::string> acts(layers.size(), "relu");
  acts.back() = "linear";
  j["architecture"] = {{"layer_sizes", model.params.sizes()}, {"activations", acts}};
  json weights = json::array(), biases = json::array();
  for (const auto& l : layers) {
    std::vector<double> w;
    w.reserve(l.W.size());
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) w.push_back(l.W(r, c));
    weights.push_back(w);
    biases.push_back(std::vector<double>(l.b.data(), l.b.data() + l.b.size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["integrator"] = to_string(model.integrator);
  j["dt"] = model.dt;
  j["seed"] = model.config.seed;
  j["anchor"] = {{"w", model.anchor.w()}, {"x", model.anchor.x()}, {"y", model.anchor.y()},
                 {"z", model.anchor.z()}};
  j["scaling"] = {{"position", kPositionScale}, {"rotation", kRotationScale}};
  const TrainConfig& c = model.config;
  j["train_config"] = {{"iterations", c.iterations},       {"learning_rate", c.learning_rate},
                       {"segment_length", c.segment_length}, {"beta1", c.beta1},
                       {"beta2", c.beta2},                 {"adam_eps", c.adam_eps}};
  out << j.dump(1) << '\n';
}

void save_checkpoint(const std::string& path, const NodeModel& model) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write checkpoint '" + path + "'");
  save_checkpoint(out, model);
  if (!out) throw InvalidArgument("write failed for '" + path + "'");
}

NodeModel load_checkpoint(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 0);
  }
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw ParseError("not an ildvs checkpoint", 0);
  }
  if (require<int>(j, "version") != kVersion) throw ParseError("unsupported checkpoint version", 0);

  const json& scaling = j.at("scaling");
  if (require<double>(scaling, "position") != kPositionScale ||
      require<double>(scaling, "rotation") != kRotationScale) {
    throw UnitMismatch("checkpoint scaling constants differ from the library's");
  }

  NodeModel m;
  m.task = require<std::string>(j, "task");
  const auto sizes = require<std::vector<int>>(j.at("architecture"), "layer_sizes");
  const auto weights = require<std::vector<std::vector<double>>>(j, "weights");
  const auto biases = require<std::vector<std::vector<double>>>(j, "biases");
  m.params = NodeParams<double>::zeros(sizes);
  if (weights.size() != m.params.layers.size() || biases.size() != m.params.layers.size()) {
    throw ParseError("layer count does not match architecture", 0);
  }
  for (std::size_t l = 0; l < m.params.layers.size(); ++l) {
    auto& L = m.params.layers[l];
    if (static_cast<Eigen::Index>(weights[l].size()) != L.W.size() ||
        static_cast<Eigen::Index>(biases[l].size()) != L.b.size()) {
      throw ParseError("tensor size mismatch in layer " + std::to_string(l), 0);
    }
    for (Eigen::Index r = 0; r < L.W.rows(); ++r)
      for (Eigen::Index c = 0; c < L.W.cols(); ++c) L.W(r, c) = weights[l][r * L.W.cols() + c];
    for (Eigen::Index r = 0; r < L.b.size(); ++r) L.b[r] = biases[l][r];
  }
  try {
    m.integrator = parse_integrator(require<std::string>(j, "integrator"));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
  m.dt = require<double>(j, "dt");
  const json& a = j.at("anchor");
  m.anchor = Quatd(require<double>(a, "w"), require<double>(a, "x"), require<double>(a, "y"),
                   require<double>(a, "z"));
  TrainConfig& c = m.config;
  const json& tc = j.at("train_config");
  c.seed = require<std::uint64_t>(j, "seed");
  c.iterations = require<long>(tc, "iterations");
  c.learning_rate = require<double>(tc, "learning_rate");
  c.segment_length = require<int>(tc, "segment_length");
  c.beta1 = require<double>(tc, "beta1");
  c.beta2 = require<double>(tc, "beta2");
  c.adam_eps = require<double>(tc, "adam_eps");
  c.integrator = m.integrator;
  c.dt = m.dt;
  c.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  if (!m.params.finite()) throw ParseError("non-finite parameters", 0);
  return m;
}

NodeModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace ildvs
