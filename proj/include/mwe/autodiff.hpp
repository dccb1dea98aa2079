#pragma once

// Minimal define-by-run reverse-mode differentiation over dense row-major
// Eigen matrices. Every value on the tape is two-dimensional; vectors are
// 1xN rows and scalars are 1x1.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwe::ad {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = MatrixX<double>;

class AutodiffError : public std::runtime_error {
 public:
  enum class Kind { ShapeMismatch, IndexOutOfVocab, NotScalarLoss, NotSquare };
  AutodiffError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A named trainable tensor with its gradient accumulator.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Matrix value)
      : name_(std::move(name)), value_(std::move(value)), grad_(Matrix::Zero(value_.rows(), value_.cols())) {}

  const std::string& name() const { return name_; }
  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }
  void zero_grad() { grad_.setZero(value_.rows(), value_.cols()); }

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives
/// and has not been reset.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape& tape() const { return *tape_; }
  std::size_t index() const { return index_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Matrix& adjoint)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Parameter& p);

  /// Records an operation result. `backprop` receives the node's adjoint and
  /// must route it to the inputs via accumulate(). `inputs` decide whether
  /// the node needs a gradient at all.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backprop backprop);

  const Matrix& value(std::size_t index) const { return nodes_[index].value; }
  bool requires_grad(std::size_t index) const { return nodes_[index].requires_grad; }
  void accumulate(const Var& v, const Matrix& adjoint);

  /// Seeds d(loss)/d(loss) = 1, visits nodes in reverse creation order and
  /// adds the results into each bound Parameter's gradient. Resets the tape.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  void reset() { nodes_.clear(); }

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;  // empty until something flows in
    Backprop backprop;
    Parameter* parameter = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(index_); }

// Operations. Binary elementwise ops accept either equal shapes or a 1xM
// right operand broadcast over the rows of the left one.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var mean_rows(const Var& a);  // NxM -> 1xM
Var concat(const Var& a, const Var& b);  // along the last axis
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);  // row-major order preserved
Var embedding_lookup(const Var& table, std::span<const int> ids);
/// Mean over rows of -log softmax(logits)[label].
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);

/// Identity forward; backward multiplies the adjoint by `factor`.
Var gradient_scale(const Var& a, double factor);
/// Gradient reversal: identity forward, adjoint times -lambda backward.
Var grad_reverse(const Var& a, double lambda);

/// Square matrix with its main diagonal set to zero. No adjoint reaches the
/// diagonal of the input.
Var zero_diag(const Var& a);

/// Forward: 1 where x > 0, else 0. Backward: the derivative of sigmoid(k x),
/// k * s * (1 - s).
Var heaviside_surrogate(const Var& a, double k);
/// sigmoid(k x) forward and backward; the smooth relaxation of the above.
Var sigmoid_scaled(const Var& a, double k);
/// True step: forward as heaviside_surrogate, zero derivative.
Var heaviside(const Var& a);

namespace testing {
/// Multiplies the sigmoid adjoint by this factor. 1.0 outside of tests that
/// need a corrupted gradient on purpose.
void set_sigmoid_adjoint_corruption(double factor);
}  // namespace testing

}  // namespace mwe::ad
