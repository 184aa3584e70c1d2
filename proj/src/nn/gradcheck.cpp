#include "nodefeat/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nodefeat/error.hpp"
#include "nodefeat/rng.hpp"

namespace nodefeat::nn {

double finite_difference_check(const LossFn& loss, const GradFn& grad, const ParamSet& point,
                               const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite difference step must be > 0");

  const ParamSet analytic = grad(point);
  if (!analytic.same_layout(point)) throw Error(ErrorKind::ShapeMismatch, "gradient layout mismatch");

  // Flat (param, entry) coordinates; optionally a seeded subset.
  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t p = 0; p < point.size(); ++p) {
    for (Eigen::Index e = 0; e < point[p].value.size(); ++e) coords.emplace_back(p, e);
  }
  const std::size_t wanted = options.max_entries == 0 ? coords.size() : std::max<std::size_t>(options.max_entries, 50);
  if (wanted < coords.size()) {
    Rng rng(options.seed);
    rng.shuffle(std::span(coords));
    coords.resize(wanted);
    std::sort(coords.begin(), coords.end());
  }

  ParamSet probe = point;
  double worst = 0.0;
  for (const auto& [p, e] : coords) {
    double& x = probe[p].value.data()[e];
    const double original = x;
    x = original + options.step;
    const double up = loss(probe);
    x = original - options.step;
    const double down = loss(probe);
    x = original;
    const double numeric = (up - down) / (2.0 * options.step);
    const double exact = analytic[p].value.data()[e];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(exact - numeric) / denom);
  }
  return worst;
}

}  // namespace nodefeat::nn
