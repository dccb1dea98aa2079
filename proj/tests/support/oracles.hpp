#pragma once

// Reference computations that do not touch the tape. Everything here is
// written out with explicit chain-rule formulas so it can check the
// tape-based implementation.

#include "mwe/autodiff.hpp"
#include "mwe/model.hpp"

#include <Eigen/Core>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace mwe::testing {

using ad::Matrix;
using ParamMap = std::map<std::string, Matrix>;

inline ParamMap snapshot(Model& model) {
  ParamMap out;
  for (auto* p : model.parameters()) out[p->name()] = p->value();
  return out;
}

inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const auto e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Windowed embedding matrix: row i is the concatenation of the embeddings
/// at positions i-w..i+w, with the padding row outside the sentence.
inline Matrix window_matrix(const Matrix& embedding, const std::vector<int>& token_ids, int w) {
  const auto n = static_cast<Eigen::Index>(token_ids.size());
  const auto e = embedding.cols();
  Matrix out(n, (2 * w + 1) * e);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int off = -w; off <= w; ++off) {
      const auto j = i + off;
      const int id = (j < 0 || j >= n) ? Vocabulary::kPad : token_ids[static_cast<std::size_t>(j)];
      out.block(i, (off + w) * e, 1, e) = embedding.row(id);
    }
  }
  return out;
}

/// Plain windowed tagger: relu(windows * W + b) * C + c.
inline Matrix baseline_tag_logits(const ParamMap& p, const std::vector<int>& token_ids, int w) {
  const Matrix windows = window_matrix(p.at("F.embedding"), token_ids, w);
  Matrix z = windows * p.at("F.hidden.W");
  z.rowwise() += p.at("F.hidden.b").row(0);
  const Matrix f = z.cwiseMax(0.0);
  Matrix logits = f * p.at("C.head.W");
  logits.rowwise() += p.at("C.head.b").row(0);
  return logits;
}

/// One SGD step on a single sentence for the full model (lateral inhibition
/// and sentence-pooled discriminator), returning the updated parameters.
/// The three update rules are applied separately:
///   θ_C  -= α dL_y/dθ_C
///   θ_LG -= α dL_lg/dθ_LG
///   θ_F  -= α (dL_y/dθ_F - λ dL_lg/dθ_F)
inline ParamMap hand_adversarial_step(const ParamMap& p, const std::vector<int>& token_ids, const std::vector<int>& tags,
                                      int language, int window, double k, double alpha, double lambda) {
  const auto n = static_cast<Eigen::Index>(token_ids.size());
  const double nd = static_cast<double>(n);

  // Feature extractor.
  const Matrix E = window_matrix(p.at("F.embedding"), token_ids, window);
  Matrix Z = E * p.at("F.hidden.W");
  Z.rowwise() += p.at("F.hidden.b").row(0);
  const Matrix F = Z.cwiseMax(0.0);

  // Lateral inhibition.
  Matrix Weff = p.at("C.li.W").transpose();
  Weff.diagonal().setZero();
  Matrix pre = F * Weff;
  pre.rowwise() += p.at("C.li.b").row(0);
  const Matrix G = pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  const Matrix Y = F.cwiseProduct(G);

  // Tag head and L_y.
  Matrix logits = Y * p.at("C.head.W");
  logits.rowwise() += p.at("C.head.b").row(0);
  Matrix dlogits = softmax_rows(logits);
  for (Eigen::Index i = 0; i < n; ++i) dlogits(i, tags[static_cast<std::size_t>(i)]) -= 1.0;
  dlogits /= nd;

  const Matrix dHeadW = Y.transpose() * dlogits;
  const Matrix dHeadB = dlogits.colwise().sum();
  const Matrix dY = dlogits * p.at("C.head.W").transpose();
  const Matrix dG = dY.cwiseProduct(F);
  Matrix dPre(n, pre.cols());
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    const double s = logistic(k * pre.data()[i]);
    dPre.data()[i] = dG.data()[i] * k * s * (1.0 - s);
  }
  Matrix dWeff = F.transpose() * dPre;
  dWeff.diagonal().setZero();
  const Matrix dLiW = dWeff.transpose();
  const Matrix dLiB = dPre.colwise().sum();
  const Matrix dF_y = dY.cwiseProduct(G) + dPre * Weff.transpose();

  // Discriminator on the mean-pooled features and L_lg.
  const Matrix m = F.colwise().mean();
  Matrix z1 = m * p.at("LG.W1") + p.at("LG.b1");
  const Matrix h1 = z1.cwiseMax(0.0);
  const Matrix lo = h1 * p.at("LG.W2") + p.at("LG.b2");
  Matrix dlo = softmax_rows(lo);
  dlo(0, language) -= 1.0;
  const Matrix dW2 = h1.transpose() * dlo;
  const Matrix db2 = dlo;
  const Matrix dh1 = dlo * p.at("LG.W2").transpose();
  const Matrix dz1 = dh1.cwiseProduct(z1.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  const Matrix dW1 = m.transpose() * dz1;
  const Matrix db1 = dz1;
  const Matrix dm = dz1 * p.at("LG.W1").transpose();
  const Matrix dF_lg = (dm / nd).replicate(n, 1);

  // Extractor gradients of each loss separately.
  struct FeatureGrads {
    Matrix embedding, hidden_w, hidden_b;
  };
  auto extractor_grads = [&](const Matrix& dF) {
    const Matrix dZ = dF.cwiseProduct(Z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    FeatureGrads g;
    g.hidden_w = E.transpose() * dZ;
    g.hidden_b = dZ.colwise().sum();
    const Matrix dE = dZ * p.at("F.hidden.W").transpose();
    const auto e = p.at("F.embedding").cols();
    g.embedding = Matrix::Zero(p.at("F.embedding").rows(), e);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int off = -window; off <= window; ++off) {
        const auto j = i + off;
        const int id = (j < 0 || j >= n) ? Vocabulary::kPad : token_ids[static_cast<std::size_t>(j)];
        g.embedding.row(id) += dE.block(i, (off + window) * e, 1, e);
      }
    }
    return g;
  };
  const auto gy = extractor_grads(dF_y);
  const auto glg = extractor_grads(dF_lg);

  ParamMap out = p;
  out["C.head.W"] -= alpha * dHeadW;
  out["C.head.b"] -= alpha * dHeadB;
  out["C.li.W"] -= alpha * dLiW;
  out["C.li.b"] -= alpha * dLiB;
  out["LG.W1"] -= alpha * dW1;
  out["LG.b1"] -= alpha * db1;
  out["LG.W2"] -= alpha * dW2;
  out["LG.b2"] -= alpha * db2;
  out["F.embedding"] -= alpha * (gy.embedding - lambda * glg.embedding);
  out["F.hidden.W"] -= alpha * (gy.hidden_w - lambda * glg.hidden_w);
  out["F.hidden.b"] -= alpha * (gy.hidden_b - lambda * glg.hidden_b);
  return out;
}

}  // namespace mwe::testing
