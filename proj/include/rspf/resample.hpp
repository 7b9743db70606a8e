#ifndef RSPF_RESAMPLE_HPP
#define RSPF_RESAMPLE_HPP

#include <algorithm>
#include <span>
#include <vector>

#include <rspf/random.hpp>

/**
 * \file
 * \brief Multinomial resampling.
 */

namespace rspf {

/// Draws `count` ancestor indices i.i.d. from the categorical distribution `weights`.
/**
 * `weights` must be nonnegative with a positive sum; they need not be normalized. Each draw
 * consumes exactly one uniform from `rng`.
 */
inline void multinomial_ancestors(std::span<const double> weights, RandomSource& rng, std::span<std::size_t> ancestors,
                                  std::vector<double>& cumulative) {
  cumulative.resize(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cumulative[i] = total;
  }
  for (auto& ancestor : ancestors) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    ancestor = std::min(static_cast<std::size_t>(it - cumulative.begin()), weights.size() - 1);
    // Skip trailing zero-weight entries that only rounding could select.
    while (weights[ancestor] <= 0.0 && ancestor > 0) {
      --ancestor;
    }
  }
}

inline std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights, std::size_t count,
                                                      RandomSource& rng) {
  std::vector<std::size_t> ancestors(count);
  std::vector<double> cumulative;
  multinomial_ancestors(weights, rng, ancestors, cumulative);
  return ancestors;
}

}  // namespace rspf

#endif
