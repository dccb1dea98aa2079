#pragma once

// Lateral inhibition gating: Y = X .* H(X * ZeroDiag(W^T) + b), with b
// broadcast over rows. Each of the d feature dimensions of a token is kept
// or zeroed by a vote of the other d - 1 dimensions; a dimension never votes
// on itself. H is the Heaviside step (H(0) = 0), trained through the
// derivative of sigmoid(k x).

#include "mwe/autodiff.hpp"

#include <Eigen/Core>

#include <random>

namespace mwe {

/// Copy of a square matrix with a zero main diagonal.
template <typename Derived>
auto zero_diagonal(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  Plain out = m;
  out.diagonal().setZero();
  return out;
}

template <typename Derived>
auto heaviside_step(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); });
}

/// Inhibition gate H(X * ZeroDiag(W^T) + b) without the tape.
template <typename DX, typename DW, typename DB>
ad::MatrixX<typename DX::Scalar> inhibition_gate(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DW>& w,
                                                 const Eigen::MatrixBase<DB>& b) {
  using M = ad::MatrixX<typename DX::Scalar>;
  M pre = x * zero_diagonal(w.transpose().eval());
  pre.rowwise() += b.row(0);
  return heaviside_step(pre);
}

template <typename DX, typename DW, typename DB>
ad::MatrixX<typename DX::Scalar> lateral_inhibition(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DW>& w,
                                                    const Eigen::MatrixBase<DB>& b) {
  return x.cwiseProduct(inhibition_gate(x, w, b));
}

class LateralInhibitionLayer {
 public:
  static constexpr double kDefaultSteepness = 10.0;

  LateralInhibitionLayer() = default;
  /// W = 0 and b = bias_init (gates open for bias_init > 0).
  explicit LateralInhibitionLayer(Eigen::Index width, double steepness = kDefaultSteepness, double bias_init = 0.1);

  Eigen::Index width() const { return weight_.value().rows(); }
  double steepness() const { return steepness_; }

  ad::Parameter& weight() { return weight_; }
  const ad::Parameter& weight() const { return weight_; }
  ad::Parameter& bias() { return bias_; }
  const ad::Parameter& bias() const { return bias_; }

  /// Hard gate forward, surrogate gradient backward.
  ad::Var forward(const ad::Var& x, const ad::Var& w, const ad::Var& b) const;
  /// Smooth gate sigmoid(k * pre) both ways. Same W and b adjoints as
  /// forward() under any loss that is linear in Y.
  ad::Var forward_relaxed(const ad::Var& x, const ad::Var& w, const ad::Var& b) const;

  ad::Matrix apply(const ad::Matrix& x) const { return lateral_inhibition(x, weight_.value(), bias_.value()); }

 private:
  ad::Parameter weight_;
  ad::Parameter bias_;
  double steepness_ = kDefaultSteepness;
};

/// Pre-activation X * ZeroDiag(W^T) + b on the tape.
ad::Var inhibition_preactivation(const ad::Var& x, const ad::Var& w, const ad::Var& b);

}  // namespace mwe
