#include "mwe/lateral_inhibition.hpp"

#include <stdexcept>

namespace mwe {

LateralInhibitionLayer::LateralInhibitionLayer(Eigen::Index width, double steepness, double bias_init)
    : weight_("C.li.W", ad::Matrix::Zero(width, width)),
      bias_("C.li.b", ad::Matrix::Constant(1, width, bias_init)),
      steepness_(steepness) {
  if (width < 1) throw std::invalid_argument("lateral inhibition width must be >= 1");
  if (!(steepness > 0.0)) throw std::invalid_argument("lateral inhibition steepness must be positive");
}

ad::Var inhibition_preactivation(const ad::Var& x, const ad::Var& w, const ad::Var& b) {
  if (w.rows() != w.cols() || w.rows() != x.cols()) {
    throw ad::AutodiffError(ad::AutodiffError::Kind::ShapeMismatch,
                            "lateral inhibition: input width " + std::to_string(x.cols()) + " vs weight " +
                                std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  return ad::add(ad::matmul(x, ad::zero_diag(ad::transpose(w))), b);
}

ad::Var LateralInhibitionLayer::forward(const ad::Var& x, const ad::Var& w, const ad::Var& b) const {
  const auto gate = ad::heaviside_surrogate(inhibition_preactivation(x, w, b), steepness_);
  return ad::mul(x, gate);
}

ad::Var LateralInhibitionLayer::forward_relaxed(const ad::Var& x, const ad::Var& w, const ad::Var& b) const {
  const auto gate = ad::sigmoid_scaled(inhibition_preactivation(x, w, b), steepness_);
  return ad::mul(x, gate);
}

}  // namespace mwe
