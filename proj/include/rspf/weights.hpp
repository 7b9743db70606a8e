#ifndef RSPF_WEIGHTS_HPP
#define RSPF_WEIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Log-space weight normalization and the effective sample size.
 */

namespace rspf {

/// Every particle has zero weight (all log-weights are -inf) at time `t`.
class DegenerateWeightsError : public std::runtime_error {
 public:
  explicit DegenerateWeightsError(std::size_t t)
      : std::runtime_error("degenerate weights: every particle has zero weight at t=" + std::to_string(t)), t_{t} {}

  std::size_t t() const { return t_; }

 private:
  std::size_t t_;
};

/// log(sum(exp(values))) via the max shift. Returns -inf for an all -inf input.
inline double log_sum_exp(std::span<const double> values) {
  const double max = values.empty() ? -std::numeric_limits<double>::infinity()
                                    : *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max)) {
    return max;
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += std::exp(v - max);
  }
  return max + std::log(sum);
}

/// Shifts `log_weights` in place so their exponentials sum to one.
/**
 * Throws `DegenerateWeightsError(t)` when no entry is finite. NaN entries count as degenerate.
 */
inline void normalize_log_weights(std::span<double> log_weights, std::size_t t = 0) {
  double max = -std::numeric_limits<double>::infinity();
  for (const double v : log_weights) {
    if (std::isnan(v)) {
      throw DegenerateWeightsError(t);
    }
    max = std::max(max, v);
  }
  if (!std::isfinite(max)) {
    throw DegenerateWeightsError(t);
  }
  double sum = 0.0;
  for (const double v : log_weights) {
    sum += std::exp(v - max);
  }
  const double log_total = max + std::log(sum);
  for (double& v : log_weights) {
    v -= log_total;
  }
}

/// Returns a normalized copy of `log_weights`.
inline std::vector<double> normalize_weights(std::span<const double> log_weights, std::size_t t = 0) {
  std::vector<double> out(log_weights.begin(), log_weights.end());
  normalize_log_weights(out, t);
  return out;
}

/// 1 / sum(w^2) for normalized weights `weights`.
inline double effective_sample_size(std::span<const double> weights) {
  double sum_of_squares = 0.0;
  for (const double w : weights) {
    sum_of_squares += w * w;
  }
  return 1.0 / sum_of_squares;
}

}  // namespace rspf

#endif
