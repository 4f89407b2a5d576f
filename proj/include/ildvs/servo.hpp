#pragma once

// Image-based visual servoing laws: point-feature interaction matrices, the
// damped pseudo-inverse, the classical law with its null-space projector, the
// norm (large-projection) law, and the smooth switch between them.
//
// The laws are written over an arbitrary number of actuated columns n so the
// same code drives a full 6-DoF twist or a restricted block of it (e.g. the
// translational 8x3 block when the angular part is commanded elsewhere).

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "ildvs/geom3d.hpp"
#include "ildvs/perception.hpp"

namespace ildvs {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct VsGains {
  double lambda = 1.0;
  double eta0 = 0.01;
  double eta1 = 0.05;
  double mu = 1e-6;
  double z_hat = 0.35;
  double eta_den_guard = 1e-9;

  void validate() const {
    if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
    if (!(eta0 >= 0 && eta0 < eta1)) throw InvalidArgument("need 0 <= eta0 < eta1");
    if (!(mu >= 0)) throw InvalidArgument("mu must be non-negative");
    if (!(z_hat > 0)) throw InvalidArgument("z_hat must be positive");
  }
};

template <typename Scalar>
struct PriorityLawOutput {
  VecX<Scalar> velocity;  // n actuated components
  Scalar eta = 0;
  Scalar alpha = 0;
  int projector_rank = 0;

  // Only meaningful when n = 6.
  Twist<Scalar> twist() const {
    if (velocity.size() != 6) throw InvalidArgument("twist() needs a 6-vector velocity");
    return Twist<Scalar>(velocity.template head<3>(), velocity.template tail<3>());
  }
};

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 6> point_interaction(Scalar x, Scalar y, Scalar Z) {
  if (!(Z > Scalar(0))) throw NonPositiveDepth("depth " + std::to_string(double(Z)));
  const Scalar iz = Scalar(1) / Z;
  Eigen::Matrix<Scalar, 2, 6> L;
  L << -iz, 0, x * iz, x * y, -(1 + x * x), y,
       0, -iz, y * iz, 1 + y * y, -x * y, -x;
  return L;
}

// Rows of the four corners (UL, UR, LR, LL), each at its own depth.
inline Eigen::Matrix<double, 8, 6> stack_interaction(const FeatureVec& f8,
                                                     const Eigen::Vector4d& depths) {
  if (f8.unit != FeatureUnit::normalized_metric || f8.arity != FeatureArity::corners_8) {
    throw UnitMismatch("stack_interaction expects normalized_metric corners_8");
  }
  Eigen::Matrix<double, 8, 6> L;
  for (int i = 0; i < 4; ++i) {
    L.middleRows<2>(2 * i) = point_interaction(f8.values[2 * i], f8.values[2 * i + 1], depths[i]);
  }
  return L;
}

inline Eigen::Matrix<double, 8, 6> stack_interaction(const FeatureVec& f8, double z_hat) {
  return stack_interaction(f8, Eigen::Vector4d::Constant(z_hat));
}

inline constexpr double kMaxGramCondition = 1e12;

// M^T (M M^T + mu^2 I)^-1 for wide/square M, (M^T M + mu^2 I)^-1 M^T for tall M.
template <typename Derived>
MatX<typename Derived::Scalar> damped_pinv(const Eigen::MatrixBase<Derived>& M,
                                           typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  if (!(mu >= Scalar(0))) throw InvalidArgument("damping must be non-negative");
  const bool wide = M.rows() <= M.cols();
  MatX<Scalar> G = wide ? MatX<Scalar>(M * M.transpose()) : MatX<Scalar>(M.transpose() * M);
  if (mu == Scalar(0)) {
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(G, Eigen::EigenvaluesOnly);
    const Scalar lo = es.eigenvalues().minCoeff();
    const Scalar hi = es.eigenvalues().maxCoeff();
    if (!(lo > Scalar(0)) || hi / lo > Scalar(kMaxGramCondition)) {
      throw SingularSystem("Gram matrix condition exceeds limit");
    }
  } else {
    G.diagonal().array() += mu * mu;
  }
  Eigen::LDLT<MatX<Scalar>> ldlt(G);
  if (wide) return M.transpose() * ldlt.solve(MatX<Scalar>::Identity(G.rows(), G.rows()));
  return ldlt.solve(M.transpose());
}

// Number of unit eigenvalues of a (near) orthogonal projector.
template <typename Derived>
int projector_rank(const Eigen::MatrixBase<Derived>& P) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<MatX<Scalar>> svd(P);
  return static_cast<int>((svd.singularValues().array() > Scalar(0.5)).count());
}

// I - L^+ L.
template <typename Derived>
MatX<typename Derived::Scalar> classic_projector(const Eigen::MatrixBase<Derived>& L,
                                                 typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  return MatX<Scalar>::Identity(L.cols(), L.cols()) - damped_pinv(L, mu) * L;
}

// I - L^T e e^T L / (e^T L L^T e).
template <typename DerivedE, typename DerivedL>
MatX<typename DerivedL::Scalar> norm_projector(const Eigen::MatrixBase<DerivedE>& e,
                                               const Eigen::MatrixBase<DerivedL>& L,
                                               double guard = 1e-9) {
  using Scalar = typename DerivedL::Scalar;
  const VecX<Scalar> g = L.transpose() * e;
  const Scalar den = g.squaredNorm();
  if (!(den > Scalar(guard * guard))) throw DegenerateDirection("e^T L L^T e below guard");
  return MatX<Scalar>::Identity(L.cols(), L.cols()) - g * g.transpose() / den;
}

// v_e = -lambda L^+ e + P sigma.
template <typename DerivedE, typename DerivedL, typename DerivedS>
PriorityLawOutput<typename DerivedL::Scalar> classic_law(const Eigen::MatrixBase<DerivedE>& e,
                                                         const Eigen::MatrixBase<DerivedL>& L,
                                                         const Eigen::MatrixBase<DerivedS>& sigma,
                                                         const VsGains& gains) {
  using Scalar = typename DerivedL::Scalar;
  if (e.size() != L.rows() || sigma.size() != L.cols()) {
    throw InvalidArgument("classic_law: dimension mismatch");
  }
  const MatX<Scalar> Lp = damped_pinv(L, Scalar(gains.mu));
  const MatX<Scalar> P = MatX<Scalar>::Identity(L.cols(), L.cols()) - Lp * L;
  PriorityLawOutput<Scalar> out;
  out.velocity = -Scalar(gains.lambda) * (Lp * e) + P * sigma;
  out.eta = e.norm();
  out.alpha = 0;
  out.projector_rank = projector_rank(P);
  return out;
}

// v_eta = -lambda eta L_eta^+ + P_eta sigma, L_eta^+ = eta L^T e / (e^T L L^T e).
template <typename DerivedE, typename DerivedL, typename DerivedS>
PriorityLawOutput<typename DerivedL::Scalar> norm_law(const Eigen::MatrixBase<DerivedE>& e,
                                                      const Eigen::MatrixBase<DerivedL>& L,
                                                      const Eigen::MatrixBase<DerivedS>& sigma,
                                                      const VsGains& gains) {
  using Scalar = typename DerivedL::Scalar;
  if (e.size() != L.rows() || sigma.size() != L.cols()) {
    throw InvalidArgument("norm_law: dimension mismatch");
  }
  const VecX<Scalar> g = L.transpose() * e;
  const Scalar den = g.squaredNorm();
  if (!(den > Scalar(gains.eta_den_guard * gains.eta_den_guard))) {
    throw DegenerateDirection("e^T L L^T e below guard");
  }
  const Scalar eta = e.norm();
  const MatX<Scalar> P = MatX<Scalar>::Identity(L.cols(), L.cols()) - g * g.transpose() / den;
  PriorityLawOutput<Scalar> out;
  out.velocity = -Scalar(gains.lambda) * eta * (eta * g / den) + P * sigma;
  out.eta = eta;
  out.alpha = 1;
  out.projector_rank = projector_rank(P);
  return out;
}

template <typename Scalar>
Scalar switch_alpha(Scalar eta, const VsGains& gains) {
  if (eta <= Scalar(gains.eta0)) return Scalar(0);
  if (eta >= Scalar(gains.eta1)) return Scalar(1);
  const Scalar t = (eta - Scalar(gains.eta0)) / Scalar(gains.eta1 - gains.eta0);
  return t * t * (Scalar(3) - Scalar(2) * t);
}

// alpha(eta) v_eta + (1 - alpha(eta)) v_e. Only the laws with non-zero weight are
// evaluated, so the norm law is never touched for eta <= eta0.
template <typename DerivedE, typename DerivedL, typename DerivedS>
PriorityLawOutput<typename DerivedL::Scalar> combined_law(const Eigen::MatrixBase<DerivedE>& e,
                                                          const Eigen::MatrixBase<DerivedL>& L,
                                                          const Eigen::MatrixBase<DerivedS>& sigma,
                                                          const VsGains& gains) {
  using Scalar = typename DerivedL::Scalar;
  const Scalar alpha = switch_alpha(Scalar(e.norm()), gains);
  if (alpha == Scalar(0)) return classic_law(e, L, sigma, gains);
  if (alpha == Scalar(1)) return norm_law(e, L, sigma, gains);
  PriorityLawOutput<Scalar> ve = classic_law(e, L, sigma, gains);
  PriorityLawOutput<Scalar> vn = norm_law(e, L, sigma, gains);
  vn.velocity = alpha * vn.velocity + (Scalar(1) - alpha) * ve.velocity;
  vn.alpha = alpha;
  return vn;
}

}  // namespace ildvs
