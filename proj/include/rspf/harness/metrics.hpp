#ifndef RSPF_HARNESS_METRICS_HPP
#define RSPF_HARNESS_METRICS_HPP

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include <rspf/ssm.hpp>

namespace rspf::harness {

/// Running sum of squared errors: entry t is sum_{tau <= t} (estimate - truth)^2.
inline std::vector<double> cumulative_squared_error(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.size() != estimate.size()) {
    throw ConfigError("cumulative_squared_error: length mismatch");
  }
  std::vector<double> out(truth.size());
  double total = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const double error = estimate[t] - truth[t];
    total += error * error;
    out[t] = total;
  }
  return out;
}

/// Mean squared error over the sequence.
inline double mse(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.empty()) {
    throw ConfigError("mse: empty sequence");
  }
  return cumulative_squared_error(truth, estimate).back() / static_cast<double>(truth.size());
}

/// Fraction of time steps where the selected model equals the true one.
inline double model_accuracy(std::span<const ModelIndex> truth, std::span<const ModelIndex> estimate) {
  if (truth.size() != estimate.size() || truth.empty()) {
    throw ConfigError("model_accuracy: sequences must be non-empty and of equal length");
  }
  std::size_t hits = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    hits += truth[t] == estimate[t] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Average, best and worst of a per-run metric.
struct MetricSummary {
  double average = 0.0;
  double best = 0.0;
  double worst = 0.0;
};

/// `lower_is_better` selects min as best (MSE) or max as best (accuracy).
inline MetricSummary summarize(std::span<const double> values, bool lower_is_better) {
  if (values.empty()) {
    return {};
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
  }
  const auto [min, max] = std::minmax_element(values.begin(), values.end());
  MetricSummary summary;
  // Clamp so rounding in the sum cannot push the mean outside [min, max].
  summary.average = std::clamp(sum / static_cast<double>(values.size()), *min, *max);
  summary.best = lower_is_better ? *min : *max;
  summary.worst = lower_is_better ? *max : *min;
  return summary;
}

}  // namespace rspf::harness

#endif
