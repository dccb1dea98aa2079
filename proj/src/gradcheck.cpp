#include "mwe/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mwe::ad {

namespace {

double evaluate(const Objective& f) {
  Tape tape;
  return f(tape).scalar();
}

}  // namespace

GradCheckResult finite_difference_check(const Objective& f, std::span<Parameter* const> params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_check: step must be positive");
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }

  GradCheckResult result;
  for (auto* p : params) {
    auto& value = p->value();
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + h;
      const double up = evaluate(f);
      value.data()[i] = saved - h;
      const double down = evaluate(f);
      value.data()[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad().data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      if (err > result.max_relative_error || result.worst_index < 0) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        result.worst_parameter = p->name();
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mwe::ad
