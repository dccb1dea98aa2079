#pragma once

#include "mwe/autodiff.hpp"

#include <functional>
#include <span>
#include <string>

namespace mwe::ad {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;  // at the worst entry
  double numeric = 0.0;
};

/// Scalar objective built on a fresh tape from the current parameter values.
using Objective = std::function<Var(Tape&)>;

/// Compares tape gradients with central differences (f(p+h) - f(p-h)) / 2h,
/// entry by entry. Relative error = |a - n| / max(|a|, |n|, 1e-8).
/// Parameter values are restored afterwards; gradients are left holding the
/// analytic result.
GradCheckResult finite_difference_check(const Objective& f, std::span<Parameter* const> params, double h = 1e-5);

}  // namespace mwe::ad
