#include "mwe/autodiff.hpp"

#include <cmath>

namespace mwe::ad {

namespace {

double g_sigmoid_corruption = 1.0;

std::string shape_str(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw AutodiffError(AutodiffError::Kind::ShapeMismatch,
                      std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

bool broadcasts(const Matrix& a, const Matrix& b) { return b.rows() == 1 && b.cols() == a.cols() && a.rows() > 1; }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix logistic(const Matrix& x) { return x.unaryExpr([](double v) { return logistic(v); }); }

Matrix step(const Matrix& x) { return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }); }

}  // namespace

namespace testing {
void set_sigmoid_adjoint_corruption(double factor) { g_sigmoid_corruption = factor; }
}  // namespace testing

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back(Node{p.value(), {}, {}, &p, true});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backprop backprop) {
  bool needs = false;
  bool finite_inputs = true;
  for (const auto& in : inputs) {
    needs = needs || nodes_[in.index()].requires_grad;
#ifndef NDEBUG
    finite_inputs = finite_inputs && nodes_[in.index()].value.allFinite();
#endif
  }
#ifndef NDEBUG
  if (finite_inputs && !value.allFinite()) throw std::domain_error("non-finite value produced from finite inputs");
#endif
  (void)finite_inputs;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backprop) : Backprop{}, nullptr, needs});
  return {this, nodes_.size() - 1};
}

void Tape::accumulate(const Var& v, const Matrix& adjoint) {
  auto& node = nodes_[v.index()];
  if (!node.requires_grad) return;
  if (node.adjoint.size() == 0) {
    node.adjoint = adjoint;
  } else {
    node.adjoint += adjoint;
  }
}

void Tape::backward(const Var& loss) {
  const auto& lv = nodes_.at(loss.index()).value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw AutodiffError(AutodiffError::Kind::NotScalarLoss, "backward: loss is " + shape_str(lv) + ", expected 1x1");
  }
  nodes_[loss.index()].adjoint = Matrix::Ones(1, 1);
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.adjoint.size() == 0) continue;
    if (node.backprop) node.backprop(*this, node.adjoint);
    if (node.parameter) node.parameter->grad() += node.adjoint;
  }
  reset();
}

Var matmul(const Var& a, const Var& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.cols() != B.rows()) shape_mismatch("matmul", A, B);
  return a.tape().record(A * B, {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a.index())) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b.index())) t.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(const Var& a) {
  return a.tape().record(a.value().transpose(), {a}, [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

Var add(const Var& a, const Var& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.rows() == B.rows() && A.cols() == B.cols()) {
    return a.tape().record(A + B, {a, b}, [a, b](Tape& t, const Matrix& g) {
      t.accumulate(a, g);
      t.accumulate(b, g);
    });
  }
  if (!broadcasts(A, B)) shape_mismatch("add", A, B);
  Matrix out = A.rowwise() + B.row(0);
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g.colwise().sum());
  });
}

Var mul(const Var& a, const Var& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.rows() == B.rows() && A.cols() == B.cols()) {
    return a.tape().record(A.cwiseProduct(B), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a.index())) t.accumulate(a, g.cwiseProduct(b.value()));
      if (t.requires_grad(b.index())) t.accumulate(b, g.cwiseProduct(a.value()));
    });
  }
  if (!broadcasts(A, B)) shape_mismatch("mul", A, B);
  Matrix out = A.array().rowwise() * B.row(0).array();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a.index())) {
      Matrix ga = g.array().rowwise() * b.value().row(0).array();
      t.accumulate(a, ga);
    }
    if (t.requires_grad(b.index())) t.accumulate(b, g.cwiseProduct(a.value()).colwise().sum());
  });
}

Var scale(const Var& a, double factor) {
  return a.tape().record(a.value() * factor, {a}, [a, factor](Tape& t, const Matrix& g) { t.accumulate(a, g * factor); });
}

Var sigmoid(const Var& a) {
  Matrix s = logistic(a.value());
  return a.tape().record(s, {a}, [a, s](Tape& t, const Matrix& g) {
    Matrix local = s.array() * (1.0 - s.array());
    t.accumulate(a, g.cwiseProduct(local) * g_sigmoid_corruption);
  });
}

Var relu(const Var& a) {
  return a.tape().record(a.value().cwiseMax(0.0), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(step(a.value())));
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(const Var& a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw AutodiffError(AutodiffError::Kind::ShapeMismatch, "mean of empty tensor");
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return a.tape().record(std::move(out), {a}, [a, n](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / n));
  });
}

Var mean_rows(const Var& a) {
  const auto n = static_cast<double>(a.rows());
  if (n == 0) throw AutodiffError(AutodiffError::Kind::ShapeMismatch, "mean_rows of empty tensor");
  Matrix out = a.value().colwise().sum() / n;
  return a.tape().record(std::move(out), {a}, [a, n](Tape& t, const Matrix& g) {
    t.accumulate(a, (g / n).replicate(a.rows(), 1));
  });
}

Var concat(const Var& a, const Var& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.rows() != B.rows()) shape_mismatch("concat", A, B);
  Matrix out(A.rows(), A.cols() + B.cols());
  out << A, B;
  const auto ac = A.cols();
  const auto bc = B.cols();
  return a.tape().record(std::move(out), {a, b}, [a, b, ac, bc](Tape& t, const Matrix& g) {
    t.accumulate(a, g.leftCols(ac));
    t.accumulate(b, g.rightCols(bc));
  });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  const auto& A = a.value();
  if (rows * cols != A.size()) {
    throw AutodiffError(AutodiffError::Kind::ShapeMismatch,
                        "reshape: " + shape_str(A) + " to " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix out = Eigen::Map<const Matrix>(A.data(), rows, cols);
  const auto r0 = A.rows();
  const auto c0 = A.cols();
  return a.tape().record(std::move(out), {a}, [a, r0, c0](Tape& t, const Matrix& g) {
    t.accumulate(a, Eigen::Map<const Matrix>(g.data(), r0, c0));
  });
}

Var embedding_lookup(const Var& table, std::span<const int> ids) {
  const auto& T = table.value();
  Matrix out(static_cast<Eigen::Index>(ids.size()), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= T.rows()) {
      throw AutodiffError(AutodiffError::Kind::IndexOutOfVocab,
                          "embedding_lookup: id " + std::to_string(ids[i]) + " outside table of " + std::to_string(T.rows()));
    }
    out.row(static_cast<Eigen::Index>(i)) = T.row(ids[i]);
  }
  std::vector<int> kept(ids.begin(), ids.end());
  return table.tape().record(std::move(out), {table}, [table, kept = std::move(kept)](Tape& t, const Matrix& g) {
    Matrix gt = Matrix::Zero(table.rows(), table.cols());
    for (std::size_t i = 0; i < kept.size(); ++i) gt.row(kept[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(table, gt);
  });
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
  const auto& L = logits.value();
  if (static_cast<std::size_t>(L.rows()) != labels.size() || L.rows() == 0) {
    throw AutodiffError(AutodiffError::Kind::ShapeMismatch, "softmax_cross_entropy: " + shape_str(L) + " logits for " +
                                                                std::to_string(labels.size()) + " labels");
  }
  Matrix probs(L.rows(), L.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= L.cols()) {
      throw AutodiffError(AutodiffError::Kind::ShapeMismatch, "softmax_cross_entropy: label " + std::to_string(y) + " out of range");
    }
    const double m = L.row(i).maxCoeff();
    const auto shifted = (L.row(i).array() - m).exp();
    const double z = shifted.sum();
    probs.row(i) = shifted / z;
    total += (std::log(z) + m) - L(i, y);
  }
  const auto n = static_cast<double>(L.rows());
  Matrix out(1, 1);
  out(0, 0) = total / n;
  std::vector<int> kept(labels.begin(), labels.end());
  return logits.tape().record(std::move(out), {logits}, [logits, probs = std::move(probs), kept = std::move(kept), n](
                                                            Tape& t, const Matrix& g) {
    Matrix grad = probs;
    for (std::size_t i = 0; i < kept.size(); ++i) grad(static_cast<Eigen::Index>(i), kept[i]) -= 1.0;
    t.accumulate(logits, grad * (g(0, 0) / n));
  });
}

Var gradient_scale(const Var& a, double factor) {
  return a.tape().record(a.value(), {a}, [a, factor](Tape& t, const Matrix& g) { t.accumulate(a, g * factor); });
}

Var grad_reverse(const Var& a, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("grad_reverse: lambda must be finite and >= 0");
  return gradient_scale(a, -lambda);
}

Var zero_diag(const Var& a) {
  const auto& A = a.value();
  if (A.rows() != A.cols()) {
    throw AutodiffError(AutodiffError::Kind::NotSquare, "zero_diag: " + shape_str(A) + " is not square");
  }
  Matrix out = A;
  out.diagonal().setZero();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix ga = g;
    ga.diagonal().setZero();
    t.accumulate(a, ga);
  });
}

Var heaviside_surrogate(const Var& a, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("heaviside_surrogate: steepness must be positive");
  return a.tape().record(step(a.value()), {a}, [a, k](Tape& t, const Matrix& g) {
    const Matrix s = logistic(a.value() * k);
    Matrix local = k * s.array() * (1.0 - s.array());
    t.accumulate(a, g.cwiseProduct(local));
  });
}

Var sigmoid_scaled(const Var& a, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("sigmoid_scaled: steepness must be positive");
  Matrix s = logistic(a.value() * k);
  return a.tape().record(s, {a}, [a, k, s](Tape& t, const Matrix& g) {
    Matrix local = k * s.array() * (1.0 - s.array());
    t.accumulate(a, g.cwiseProduct(local));
  });
}

Var heaviside(const Var& a) {
  return a.tape().record(step(a.value()), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Zero(g.rows(), g.cols()));
  });
}

}  // namespace mwe::ad
