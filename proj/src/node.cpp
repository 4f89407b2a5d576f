#include "ildvs/node.hpp"

#include <cmath>

namespace ildvs {

const char* to_string(Integrator integrator) {
  return integrator == Integrator::euler ? "euler" : "rk4";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "euler") return Integrator::euler;
  if (name == "rk4") return Integrator::rk4;
  throw InvalidArgument("unknown integrator '" + name + "' (euler|rk4)");
}

void Demonstrations::validate() const {
  if (sequences.empty()) throw InvalidArgument("no demonstrations");
  if (!(dt > 0)) throw InvalidArgument("demonstration dt must be positive");
  for (const auto& s : sequences) {
    if (s.rows() != kStateDim) throw InvalidArgument("demonstration state must be 10-dimensional");
    if (s.cols() != length()) throw InvalidArgument("demonstrations differ in length");
    if (!s.allFinite()) throw InvalidArgument("demonstration contains non-finite values");
  }
}

void TrainConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (!(learning_rate > 0)) throw InvalidArgument("learning rate must be positive");
  if (segment_length < 2) throw InvalidArgument("segment length must be >= 2");
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
  if (hidden.empty()) throw InvalidArgument("need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw InvalidArgument("hidden sizes must be positive");
}

std::vector<Segment> sample_segments(const Demonstrations& demos, int segment_length,
                                     std::mt19937_64& rng) {
  const Eigen::Index T = demos.length();
  if (segment_length < 1) throw InvalidArgument("segment length must be >= 1");
  if (segment_length > T) {
    throw SegmentTooLong(std::to_string(segment_length) + " > demo length " + std::to_string(T));
  }
  std::uniform_int_distribution<Eigen::Index> start(0, T - segment_length);
  std::vector<Segment> out;
  for (std::size_t n = 0; n < demos.count(); ++n) out.push_back({n, start(rng)});
  return out;
}

LossComponents node_loss(const std::vector<Eigen::MatrixXd>& pred,
                         const std::vector<Eigen::MatrixXd>& truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("node_loss: batch size mismatch");
  LossComponents c;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    if (pred[n].rows() != kStateDim || pred[n].rows() != truth[n].rows() ||
        pred[n].cols() != truth[n].cols()) {
      throw InvalidArgument("node_loss: shape mismatch");
    }
    const Eigen::MatrixXd d = pred[n] - truth[n];
    c.f += 0.5 * d.topRows<4>().squaredNorm();
    c.p += 0.5 * d.middleRows<3>(4).squaredNorm();
    c.r += 0.5 * d.bottomRows<3>().squaredNorm();
  }
  return c;
}

namespace {

struct AdamState {
  NodeParams<double> m, v;
  long t = 0;
};

void adam_update(NodeParams<double>& params, const NodeParams<double>& grad, AdamState& s,
                 const TrainConfig& cfg) {
  ++s.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
  auto step = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_eps);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    step(params.layers[l].W, grad.layers[l].W, s.m.layers[l].W, s.v.layers[l].W);
    step(params.layers[l].b, grad.layers[l].b, s.m.layers[l].b, s.v.layers[l].b);
  }
}

}  // namespace

TrainResult train(const Demonstrations& demos, const TrainConfig& config,
                  const TrainObserver& observer) {
  demos.validate();
  config.validate();
  if (config.segment_length > demos.length()) {
    throw SegmentTooLong(std::to_string(config.segment_length) + " > demo length " +
                         std::to_string(demos.length()));
  }
  std::mt19937_64 rng(config.seed);
  std::vector<int> sizes{kStateDim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(kStateDim);

  TrainResult result;
  NodeModel& model = result.model;
  model.params = NodeParams<double>::uniform_fan_in(sizes, rng);
  model.integrator = config.integrator;
  model.dt = config.dt;
  model.anchor = demos.anchor;
  model.config = config;
  model.task = demos.task;

  AdamState adam{model.params.zeros_like(), model.params.zeros_like()};
  NodeParams<double> grad = model.params.zeros_like();
  std::vector<Eigen::MatrixXd> batch(demos.count());
  result.loss_curve.reserve(config.iterations);

  for (long it = 0; it < config.iterations; ++it) {
    const auto segments = sample_segments(demos, config.segment_length, rng);
    for (std::size_t n = 0; n < segments.size(); ++n) {
      batch[n] = demos.sequences[segments[n].demo].middleCols(segments[n].start,
                                                              config.segment_length);
    }
    double loss;
    try {
      loss = loss_and_gradient(model.params, batch, config.dt, config.integrator, grad);
    } catch (const NumericalBlowup& e) {
      throw NumericalBlowup(e.what(), it);
    }
    if (!std::isfinite(loss) || !grad.finite()) throw NumericalBlowup("non-finite loss", it);
    result.loss_curve.push_back(loss);
    if (observer) observer(it, loss);
    adam_update(model.params, grad, adam, config);
  }
  if (!model.params.finite()) throw NumericalBlowup("non-finite parameters", config.iterations);
  return result;
}

RolloutStep rollout_step(const NodeModel& model, const NodeState& belief) {
  if (!belief.x.allFinite()) throw NumericalBlowup("non-finite belief");
  const double dt = model.dt;
  const Eigen::VectorXd xdot = target_forward(model.params, belief.x);

  RolloutStep out;
  out.sigma.linear = xdot.segment<3>(4) / kPositionScale;
  const Vec3d r = belief.r();
  const Vec3d r_next = r + xdot.segment<3>(7) * dt;
  const Quatd q_curr = from_tangent_coords<double>(r / kRotationScale, model.anchor);
  const Quatd q_next = from_tangent_coords<double>(r_next / kRotationScale, model.anchor);
  out.sigma.angular = quat_log(q_next * q_curr.conjugate()) / dt;

  Eigen::VectorXd next;
  if (model.integrator == Integrator::euler) {
    next = belief.x + dt * xdot;
  } else {
    next = integrator_step<double>(model.params, belief.x, dt, model.integrator);
  }
  if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kBlowupLimit) {
    throw NumericalBlowup("belief exceeded limit");
  }
  out.next = NodeState(Eigen::Matrix<double, kStateDim, 1>(next));
  if (!out.sigma.finite()) throw NumericalBlowup("non-finite velocity");
  return out;
}

}  // namespace ildvs
