#pragma once

// Fully connected ReLU network used as the NODE vector field. Samples are the
// columns of the input matrix, so a whole batch goes through one GEMM per layer.

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <vector>

#include "ildvs/errors.hpp"

namespace ildvs {

template <typename Scalar>
struct DenseLayer {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> W;  // out x in
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b;                // out
};

// ReLU on every hidden layer, identity on the last.
template <typename Scalar>
struct NodeParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<DenseLayer<Scalar>> layers;

  static NodeParams zeros(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw InvalidArgument("network needs at least two layer sizes");
    NodeParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      if (sizes[l] <= 0 || sizes[l + 1] <= 0) throw InvalidArgument("layer sizes must be positive");
      p.layers.push_back({Matrix::Zero(sizes[l + 1], sizes[l]), Vector::Zero(sizes[l + 1])});
    }
    return p;
  }

  // Kaiming uniform: W and b drawn from U(-sqrt(6/fan_in), sqrt(6/fan_in)).
  template <typename Rng>
  static NodeParams uniform_fan_in(const std::vector<int>& sizes, Rng& rng) {
    NodeParams p = zeros(sizes);
    for (auto& layer : p.layers) {
      const double bound = std::sqrt(6.0 / static_cast<double>(layer.W.cols()));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j)
        for (Eigen::Index i = 0; i < layer.W.rows(); ++i) layer.W(i, j) = Scalar(u(rng));
      for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b[i] = Scalar(u(rng));
    }
    return p;
  }

  NodeParams zeros_like() const {
    NodeParams p;
    for (const auto& l : layers) {
      p.layers.push_back({Matrix::Zero(l.W.rows(), l.W.cols()), Vector::Zero(l.b.size())});
    }
    return p;
  }

  std::vector<int> sizes() const {
    std::vector<int> s{static_cast<int>(layers.front().W.cols())};
    for (const auto& l : layers) s.push_back(static_cast<int>(l.W.rows()));
    return s;
  }

  int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().W.rows()); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.W.size() + l.b.size();
    return n;
  }

  bool finite() const {
    for (const auto& l : layers)
      if (!l.W.allFinite() || !l.b.allFinite()) return false;
    return true;
  }

  void set_zero() {
    for (auto& l : layers) {
      l.W.setZero();
      l.b.setZero();
    }
  }

  // this += s * other, layer by layer.
  void axpy(Scalar s, const NodeParams& other) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].W += s * other.layers[k].W;
      layers[k].b += s * other.layers[k].b;
    }
  }
};

// Activations kept for the backward pass: inputs[l] feeds layer l, pre[l] is its
// pre-activation.
template <typename Scalar>
struct ForwardTape {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> inputs;
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> pre;
};

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> target_forward(
    const NodeParams<Scalar>& params, const Eigen::MatrixBase<Derived>& X,
    ForwardTape<Scalar>* tape = nullptr) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (X.rows() != params.input_dim()) throw InvalidArgument("network input dimension mismatch");
  const std::size_t n = params.layers.size();
  if (tape) {
    tape->inputs.resize(n);
    tape->pre.resize(n);
  }
  Matrix a = X;
  for (std::size_t l = 0; l < n; ++l) {
    const auto& layer = params.layers[l];
    Matrix z = layer.W * a;
    z.colwise() += layer.b;
    if (tape) {
      tape->inputs[l] = std::move(a);
      tape->pre[l] = z;
    }
    a = l + 1 < n ? Matrix(z.cwiseMax(Scalar(0))) : std::move(z);
  }
  return a;
}

// Accumulates dLoss/dparams into grad given dLoss/dOutput, returns dLoss/dInput.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> target_backward(
    const NodeParams<Scalar>& params, const ForwardTape<Scalar>& tape,
    const Eigen::MatrixBase<Derived>& dY, NodeParams<Scalar>& grad) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix delta = dY;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    if (l + 1 < params.layers.size()) {
      delta = delta.cwiseProduct((tape.pre[l].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
    grad.layers[l].W.noalias() += delta * tape.inputs[l].transpose();
    grad.layers[l].b += delta.rowwise().sum();
    delta = params.layers[l].W.transpose() * delta;
  }
  return delta;
}

// Jacobian of the network output with respect to a single input sample.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> target_jacobian(
    const NodeParams<Scalar>& params, const Eigen::MatrixBase<Derived>& x) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  ForwardTape<Scalar> tape;
  target_forward(params, x, &tape);
  Matrix J = Matrix::Identity(params.input_dim(), params.input_dim());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    J = params.layers[l].W * J;
    if (l + 1 < params.layers.size()) {
      for (Eigen::Index i = 0; i < J.rows(); ++i)
        if (!(tape.pre[l](i, 0) > Scalar(0))) J.row(i).setZero();
    }
  }
  return J;
}

}  // namespace ildvs
