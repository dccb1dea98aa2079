#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mwe {

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  bool expected_fail = false;  // negative control; reported, never counted
};

/// Central-difference checks of every differentiable operation, the relaxed
/// inhibition layer, and the surrogate backward of the hard layer against
/// the relaxed one. The last entry is the hard step, which has no gradient
/// and is expected to fail.
std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed = 2024, double h = 1e-5);

}  // namespace mwe
