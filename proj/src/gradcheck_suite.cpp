#include "mwe/gradcheck_suite.hpp"

#include "mwe/gradcheck.hpp"
#include "mwe/lateral_inhibition.hpp"
#include "mwe/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mwe {

namespace {

using ad::Matrix;
using ad::Parameter;

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

ad::Var readout(ad::Tape& t, const ad::Var& v, const Matrix& w) { return ad::sum(ad::mul(v, t.constant(w))); }

double max_relative_gap(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-8}));
  }
  return worst;
}

}  // namespace

std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed, double h) {
  Rng rng(seed);
  std::vector<GradCheckEntry> out;
  auto check = [&](const char* name, const ad::Objective& f, std::vector<Parameter*> params) {
    out.push_back({name, ad::finite_difference_check(f, params, h).max_relative_error, false});
  };

  Parameter a("a", random_matrix(rng, 4, 5));
  Parameter b("b", random_matrix(rng, 5, 3));
  Parameter table("table", random_matrix(rng, 6, 4));
  Parameter sq("sq", random_matrix(rng, 4, 4));
  Parameter away("away", random_matrix(rng, 4, 5, 0.2, 1.0));
  for (Eigen::Index i = 0; i < away.value().size(); i += 2) away.value().data()[i] *= -1.0;
  const Matrix w45 = random_matrix(rng, 4, 5);
  const Matrix w43 = random_matrix(rng, 4, 3);
  const Matrix w35 = random_matrix(rng, 3, 5);
  const Matrix w15 = random_matrix(rng, 1, 5);
  const Matrix w44 = random_matrix(rng, 4, 4);
  const Matrix w49 = random_matrix(rng, 4, 9);
  const Matrix w28 = random_matrix(rng, 2, 8);
  const std::vector<int> ids{5, 0, 3, 3};
  const std::vector<int> labels{2, 0, 1, 1};

  check("matmul", [&](ad::Tape& t) { return readout(t, ad::matmul(t.parameter(a), t.parameter(b)), w43); }, {&a, &b});
  check("transpose", [&](ad::Tape& t) { return readout(t, ad::transpose(t.parameter(b)), w35); }, {&b});
  check("add", [&](ad::Tape& t) { return readout(t, ad::add(t.parameter(a), t.parameter(away)), w45); }, {&a, &away});
  check("mul", [&](ad::Tape& t) { return readout(t, ad::mul(t.parameter(a), t.parameter(away)), w45); }, {&a, &away});
  check("sigmoid", [&](ad::Tape& t) { return readout(t, ad::sigmoid(t.parameter(a)), w45); }, {&a});
  check("relu", [&](ad::Tape& t) { return readout(t, ad::relu(t.parameter(away)), w45); }, {&away});
  check("mean_rows", [&](ad::Tape& t) { return readout(t, ad::mean_rows(t.parameter(a)), w15); }, {&a});
  check("concat", [&](ad::Tape& t) { return readout(t, ad::concat(t.parameter(a), t.parameter(sq)), w49); }, {&a, &sq});
  check("reshape", [&](ad::Tape& t) { return readout(t, ad::reshape(t.parameter(sq), 2, 8), w28); },
        {&sq});
  check("embedding", [&](ad::Tape& t) { return readout(t, ad::embedding_lookup(t.parameter(table), ids), w44); },
        {&table});
  check("cross-entropy",
        [&](ad::Tape& t) { return ad::softmax_cross_entropy(ad::matmul(t.parameter(a), t.parameter(b)), labels); },
        {&a, &b});
  check("zero_diag", [&](ad::Tape& t) { return readout(t, ad::zero_diag(t.parameter(sq)), w44); }, {&sq});
  {
    // Reversal is not a gradient of its forward, so it is compared with
    // -lambda times the checked plain gradient instead.
    std::vector<Parameter*> pa{&a};
    const auto plain = ad::finite_difference_check(
        [&](ad::Tape& t) { return readout(t, ad::sigmoid(t.parameter(a)), w45); }, pa, h);
    const Matrix expected = -0.7 * a.grad();
    a.zero_grad();
    ad::Tape t;
    t.backward(readout(t, ad::grad_reverse(ad::sigmoid(t.parameter(a)), 0.7), w45));
    out.push_back({"gradient reversal", std::max(plain.max_relative_error, max_relative_gap(a.grad(), expected)), false});
  }
  check("sigmoid_scaled", [&](ad::Tape& t) { return readout(t, ad::sigmoid_scaled(t.parameter(a), 4.0), w45); }, {&a});

  // Inhibition layer with pre-activations kept away from the kink.
  LateralInhibitionLayer li(4, LateralInhibitionLayer::kDefaultSteepness);
  const Matrix x = random_matrix(rng, 5, 4);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    li.weight().value() = random_matrix(rng, 4, 4);
    li.bias().value() = random_matrix(rng, 1, 4, -0.5, 0.5);
    Matrix pre = x * zero_diagonal(Matrix(li.weight().value().transpose()));
    pre.rowwise() += li.bias().value().row(0);
    if (pre.cwiseAbs().minCoeff() > 0.05) break;
  }
  const Matrix r = random_matrix(rng, 5, 4);
  Parameter xin("x", x);
  check("lateral inhibition (relaxed)",
        [&](ad::Tape& t) {
          return readout(t, li.forward_relaxed(t.parameter(xin), t.parameter(li.weight()), t.parameter(li.bias())), r);
        },
        {&xin, &li.weight(), &li.bias()});

  std::vector<Parameter*> wb{&li.weight(), &li.bias()};
  for (auto* p : wb) p->zero_grad();
  {
    ad::Tape t;
    t.backward(readout(t, li.forward(t.constant(x), t.parameter(li.weight()), t.parameter(li.bias())), r));
  }
  const Matrix surrogate_w = li.weight().grad();
  const Matrix surrogate_b = li.bias().grad();
  ad::finite_difference_check(
      [&](ad::Tape& t) {
        return readout(t, li.forward_relaxed(t.constant(x), t.parameter(li.weight()), t.parameter(li.bias())), r);
      },
      wb, h);
  out.push_back({"lateral inhibition surrogate vs relaxed",
                 std::max(max_relative_gap(surrogate_w, li.weight().grad()), max_relative_gap(surrogate_b, li.bias().grad())),
                 false});

  // The hard layer's forward is flat almost everywhere, so central
  // differences see zero while the surrogate does not.
  const auto hard = ad::finite_difference_check(
      [&](ad::Tape& t) {
        return readout(t, li.forward(t.constant(x), t.parameter(li.weight()), t.parameter(li.bias())), r);
      },
      wb, h);
  out.push_back({"lateral inhibition hard step (negative control)", hard.max_relative_error, true});
  return out;
}

}  // namespace mwe
