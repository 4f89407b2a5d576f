#pragma once

// Neural ODE imitation learner: fixed-step integration of the target network,
// segment sampling, the trajectory MSE loss with backpropagation through the
// unrolled integrator, Adam training, and the open-loop rollout that turns the
// learned vector field into a velocity command.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ildvs/geom3d.hpp"
#include "ildvs/mlp.hpp"

namespace ildvs {

// State layout: f (4, [0,100]), p (3, cm), r (3, tangent coords x 100).
inline constexpr int kStateDim = 10;
inline constexpr double kPositionScale = 100.0;  // m -> cm
inline constexpr double kRotationScale = 100.0;  // rad -> scaled tangent units
inline constexpr double kBlowupLimit = 1e6;

enum class Integrator { euler, rk4 };
const char* to_string(Integrator integrator);
Integrator parse_integrator(const std::string& name);

struct NodeState {
  Eigen::Matrix<double, kStateDim, 1> x = Eigen::Matrix<double, kStateDim, 1>::Zero();

  NodeState() = default;
  explicit NodeState(const Eigen::Matrix<double, kStateDim, 1>& v) : x(v) {}
  NodeState(const Eigen::Vector4d& f, const Vec3d& p_cm, const Vec3d& r_scaled) {
    x << f, p_cm, r_scaled;
  }

  // From SI quantities: features already in [0,100], position in m, orientation.
  static NodeState from_pose(const Eigen::Vector4d& f, const Posed& pose, const Quatd& anchor) {
    return NodeState(f, kPositionScale * pose.p, kRotationScale * tangent_coords(pose.q, anchor));
  }

  auto f() const { return x.segment<4>(0); }
  auto p() const { return x.segment<3>(4); }
  auto r() const { return x.segment<3>(7); }
  Vec3d position_m() const { return p() / kPositionScale; }
  Quatd orientation(const Quatd& anchor) const {
    return from_tangent_coords<double>(r() / kRotationScale, anchor);
  }
};

struct Demonstrations {
  std::string task;
  double dt = 1.0 / 30.0;
  Quatd anchor;
  std::vector<Eigen::MatrixXd> sequences;  // kStateDim x T each, one column per step

  std::size_t count() const { return sequences.size(); }
  Eigen::Index length() const { return sequences.empty() ? 0 : sequences.front().cols(); }
  void validate() const;
};

struct TrainConfig {
  long iterations = 20000;
  double learning_rate = 5e-4;
  int segment_length = 60;
  Integrator integrator = Integrator::euler;
  double dt = 1.0 / 30.0;
  std::uint64_t seed = 1;
  std::vector<int> hidden = {256, 256};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct NodeModel {
  NodeParams<double> params;
  Integrator integrator = Integrator::euler;
  double dt = 1.0 / 30.0;
  Quatd anchor;
  TrainConfig config;
  std::string task;
};

template <typename Scalar>
using StateBatch = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// One explicit step for a batch of states (columns).
template <typename Scalar>
StateBatch<Scalar> integrator_step(const NodeParams<Scalar>& params, const StateBatch<Scalar>& X,
                                   Scalar dt, Integrator integrator) {
  if (integrator == Integrator::euler) return X + dt * target_forward(params, X);
  const StateBatch<Scalar> k1 = target_forward(params, X);
  const StateBatch<Scalar> k2 = target_forward(params, StateBatch<Scalar>(X + (dt / 2) * k1));
  const StateBatch<Scalar> k3 = target_forward(params, StateBatch<Scalar>(X + (dt / 2) * k2));
  const StateBatch<Scalar> k4 = target_forward(params, StateBatch<Scalar>(X + dt * k3));
  return X + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// steps + 1 states, column 0 = x0. Throws NumericalBlowup past kBlowupLimit.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> integrate(
    const NodeParams<Scalar>& params, const Eigen::MatrixBase<Derived>& x0, int steps, Scalar dt,
    Integrator integrator = Integrator::euler) {
  if (steps < 1) throw InvalidArgument("integrate: steps must be >= 1");
  if (!(dt > Scalar(0))) throw InvalidArgument("integrate: dt must be positive");
  if (x0.cols() != 1) throw InvalidArgument("integrate: x0 must be a column vector");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> traj(x0.rows(), steps + 1);
  traj.col(0) = x0;
  StateBatch<Scalar> x = x0;
  for (int k = 0; k < steps; ++k) {
    x = integrator_step(params, x, dt, integrator);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > Scalar(kBlowupLimit)) {
      throw NumericalBlowup("state exceeded limit at step " + std::to_string(k + 1));
    }
    traj.col(k + 1) = x;
  }
  return traj;
}

struct Segment {
  std::size_t demo = 0;
  Eigen::Index start = 0;
};

// One uniformly placed window of T_s states per demonstration.
std::vector<Segment> sample_segments(const Demonstrations& demos, int segment_length,
                                     std::mt19937_64& rng);

struct LossComponents {
  double f = 0, p = 0, r = 0;
  double total() const { return f + p + r; }
};

// 1/2 sum over demos and time of the squared state error, split by sub-vector.
LossComponents node_loss(const std::vector<Eigen::MatrixXd>& pred,
                         const std::vector<Eigen::MatrixXd>& truth);

// Loss of the batch and its exact gradient, accumulated into grad (which is
// zeroed first). Each truth block is kStateDim x T_s; its first column is the
// integration start.
template <typename Scalar>
Scalar loss_and_gradient(const NodeParams<Scalar>& params,
                         const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& truth,
                         Scalar dt, Integrator integrator, NodeParams<Scalar>& grad) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (truth.empty()) throw InvalidArgument("empty batch");
  const Eigen::Index D = truth.front().rows();
  const Eigen::Index Ts = truth.front().cols();
  const Eigen::Index B = static_cast<Eigen::Index>(truth.size());
  if (Ts < 2) throw InvalidArgument("segments need at least two states");
  for (const auto& t : truth)
    if (t.rows() != D || t.cols() != Ts) throw InvalidArgument("ragged batch");

  // target[k] holds time k of every segment, one column per segment.
  std::vector<Matrix> target(Ts, Matrix(D, B));
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index k = 0; k < Ts; ++k) target[k].col(b) = truth[b].col(k);

  const int stages = integrator == Integrator::euler ? 1 : 4;
  const Eigen::Index steps = Ts - 1;
  std::vector<std::vector<ForwardTape<Scalar>>> tapes(steps, std::vector<ForwardTape<Scalar>>(stages));
  std::vector<Matrix> states(Ts);
  states[0] = target[0];
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Matrix& x = states[k];
    auto& tp = tapes[k];
    if (integrator == Integrator::euler) {
      states[k + 1] = x + dt * target_forward(params, x, &tp[0]);
    } else {
      const Matrix k1 = target_forward(params, x, &tp[0]);
      const Matrix k2 = target_forward(params, Matrix(x + (dt / 2) * k1), &tp[1]);
      const Matrix k3 = target_forward(params, Matrix(x + (dt / 2) * k2), &tp[2]);
      const Matrix k4 = target_forward(params, Matrix(x + dt * k3), &tp[3]);
      states[k + 1] = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!states[k + 1].allFinite() || states[k + 1].cwiseAbs().maxCoeff() > Scalar(kBlowupLimit)) {
      throw NumericalBlowup("state exceeded limit during training rollout");
    }
  }

  if (grad.layers.size() != params.layers.size()) grad = params.zeros_like();
  else grad.set_zero();
  Scalar loss = 0;
  Matrix adj = Matrix::Zero(D, B);  // dL/dx_{k+1}
  for (Eigen::Index k = steps; k >= 1; --k) {
    const Matrix res = states[k] - target[k];
    loss += Scalar(0.5) * res.squaredNorm();
    adj += res;
    const auto& tp = tapes[k - 1];
    if (integrator == Integrator::euler) {
      adj += target_backward(params, tp[0], Matrix(dt * adj), grad);
    } else {
      const Matrix g4 = target_backward(params, tp[3], Matrix((dt / 6) * adj), grad);
      const Matrix g3 = target_backward(params, tp[2], Matrix((dt / 3) * adj + dt * g4), grad);
      const Matrix g2 = target_backward(params, tp[1], Matrix((dt / 3) * adj + (dt / 2) * g3), grad);
      const Matrix g1 = target_backward(params, tp[0], Matrix((dt / 6) * adj + (dt / 2) * g2), grad);
      adj += g1 + g2 + g3 + g4;
    }
  }
  return loss;
}

struct TrainResult {
  NodeModel model;
  std::vector<double> loss_curve;
};

// Optional per-iteration observer (iteration, loss).
using TrainObserver = std::function<void(long, double)>;

TrainResult train(const Demonstrations& demos, const TrainConfig& config,
                  const TrainObserver& observer = {});

struct RolloutStep {
  Twistd sigma;
  NodeState next;
};

// Evaluates the field at the belief, converts it to an SI world-frame twist and
// advances the belief one integration step. The angular part carries the
// orientation exp(r/100) * anchor onto exp((r + r_dot dt)/100) * anchor in dt.
RolloutStep rollout_step(const NodeModel& model, const NodeState& belief);

}  // namespace ildvs
