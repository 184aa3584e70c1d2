#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "nodefeat/nn/params.hpp"

namespace nodefeat::nn {

/// Scalar loss at a parameter point.
using LossFn = std::function<double(const ParamSet&)>;
/// Analytic gradient at a parameter point (same layout as the point).
using GradFn = std::function<ParamSet(const ParamSet&)>;

struct GradCheckOptions {
  double step = 1e-5;
  /// Entries checked; 0 checks every entry. Values below 50 are raised to 50.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
};

/// Central differences (f(x+h) - f(x-h)) / 2h against the analytic gradient.
/// Returns the max over checked entries of |a - n| / max(|a|, |n|, 1e-8).
double finite_difference_check(const LossFn& loss, const GradFn& grad, const ParamSet& point,
                               const GradCheckOptions& options = {});

}  // namespace nodefeat::nn
