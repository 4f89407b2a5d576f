#include <random>
#include <sstream>

#include "doctest.h"
#include "ildvs/checkpoint.hpp"
#include "ildvs/demo_io.hpp"
#include "json.hpp"

using namespace ildvs;

namespace {

Demonstrations sample_demos() {
  Demonstrations d;
  d.task = "mouse";
  d.dt = 1.0 / 30.0;
  d.anchor = Quatd::from_axis_angle(Vec3d(1, -1, 2).normalized(), 2.2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 40);
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd s(kStateDim, 7);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = n(rng);
    d.sequences.push_back(s);
  }
  return d;
}

NodeModel sample_model() {
  std::mt19937_64 rng(5);
  NodeModel m;
  m.params = NodeParams<double>::uniform_fan_in({kStateDim, 12, 9, kStateDim}, rng);
  m.integrator = Integrator::rk4;
  m.dt = 0.025;
  m.anchor = Quatd::from_axis_angle(Vec3d::UnitY(), 0.3);
  m.task = "cup";
  m.config.seed = 77;
  m.config.iterations = 1234;
  m.config.hidden = {12, 9};
  return m;
}

}  // namespace

TEST_CASE("demo file round trip is lossless") {
  const Demonstrations d = sample_demos();
  std::stringstream ss;
  write_demos(ss, d);
  const std::string text = ss.str();
  CHECK(text.rfind("# ildvs-demos task=mouse", 0) == 0);
  CHECK(text.find("demo,t,f1,f2,f3,f4,p1,p2,p3,r1,r2,r3") != std::string::npos);
  const Demonstrations r = read_demos(ss);
  CHECK(r.task == "mouse");
  CHECK(r.dt == d.dt);
  CHECK(r.anchor.eigen().coeffs() == d.anchor.eigen().coeffs());
  REQUIRE(r.count() == 3);
  for (std::size_t n = 0; n < 3; ++n) CHECK(r.sequences[n] == d.sequences[n]);
}

TEST_CASE("corrupt demo file reports the line") {
  const Demonstrations d = sample_demos();
  std::stringstream ss;
  write_demos(ss, d);
  std::string text = ss.str();
  // Damage the fifth line (third data row).
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
  text.replace(text.find(',', pos) + 1, 1, "x");
  std::stringstream bad(text);
  try {
    read_demos(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  std::stringstream no_header("demo,t\n0,0\n");
  CHECK_THROWS_AS(read_demos(no_header), ParseError);
}

TEST_CASE("checkpoint round trip is lossless") {
  const NodeModel m = sample_model();
  std::stringstream ss;
  save_checkpoint(ss, m);
  const auto doc = nlohmann::json::parse(ss.str());
  CHECK(doc["format"] == "ildvs-node-checkpoint");
  CHECK(doc["architecture"]["layer_sizes"] == std::vector<int>{10, 12, 9, 10});
  CHECK(doc["architecture"]["activations"][0] == "relu");
  CHECK(doc["scaling"]["position"] == 100.0);
  ss.seekg(0);
  const NodeModel r = load_checkpoint(ss);
  REQUIRE(r.params.layers.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(r.params.layers[l].W == m.params.layers[l].W);
    CHECK(r.params.layers[l].b == m.params.layers[l].b);
  }
  CHECK(r.integrator == Integrator::rk4);
  CHECK(r.dt == m.dt);
  CHECK(r.task == "cup");
  CHECK(r.config.seed == 77);
  CHECK(r.config.iterations == 1234);
  CHECK(r.anchor.eigen().coeffs() == m.anchor.eigen().coeffs());
}

TEST_CASE("checkpoint loader rejects bad documents") {
  std::stringstream junk("{not json");
  CHECK_THROWS_AS(load_checkpoint(junk), ParseError);
  const NodeModel m = sample_model();
  std::stringstream ss;
  save_checkpoint(ss, m);
  auto doc = nlohmann::json::parse(ss.str());
  doc["scaling"]["rotation"] = 57.0;
  std::stringstream scaled(doc.dump());
  CHECK_THROWS_AS(load_checkpoint(scaled), UnitMismatch);
  doc = nlohmann::json::parse(ss.str());
  doc.erase("weights");
  std::stringstream missing(doc.dump());
  CHECK_THROWS_AS(load_checkpoint(missing), ParseError);
}
