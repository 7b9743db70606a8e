#ifndef RSPF_ORACLE_HPP
#define RSPF_ORACLE_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <rspf/random.hpp>
#include <rspf/regime_dynamics.hpp>
#include <rspf/ssm.hpp>

/**
 * \file
 * \brief Exact filtering posteriors for small linear-Gaussian regime-switching models.
 *
 * Given a model sequence the system is linear-Gaussian, so a Kalman filter yields the exact
 * evidence and state posterior. Summing over every model sequence gives exact model and state
 * marginals. The sequence prior is computed directly from each explicit sequence and does not go
 * through `RegimeDynamics::log_prior_unchecked`.
 */

namespace rspf::oracle {

/// Per model k:  x_t = a_k x_{t-1} + c_k + u_t,  y_t = h_k x_t + d_k + v_t,  x_0 ~ N(m0_k, s0_k).
struct LinearGaussianParams {
  std::vector<double> a;
  std::vector<double> c;
  std::vector<double> h;
  std::vector<double> d;
  std::vector<double> initial_mean;
  std::vector<double> initial_variance;
  double process_variance = 1.0;
  double observation_variance = 1.0;
};

/// `CandidateModelSet` over `LinearGaussianParams`, so the particle filters can run on it too.
class LinearGaussianModelSet {
 public:
  using state_type = double;
  using observation_type = double;

  explicit LinearGaussianModelSet(LinearGaussianParams params) : params_{std::move(params)} {
    const auto size = params_.a.size();
    if (size == 0 || params_.c.size() != size || params_.h.size() != size || params_.d.size() != size ||
        params_.initial_mean.size() != size || params_.initial_variance.size() != size) {
      throw ConfigError("linear-Gaussian parameters must be non-empty arrays of equal length");
    }
    if (!(params_.process_variance > 0.0) || !(params_.observation_variance > 0.0)) {
      throw ConfigError("linear-Gaussian noise variances must be positive");
    }
    for (const double v : params_.initial_variance) {
      if (!(v > 0.0)) {
        throw ConfigError("linear-Gaussian initial variances must be positive");
      }
    }
  }

  std::size_t size() const { return params_.a.size(); }
  const LinearGaussianParams& params() const { return params_; }

  double sample_initial(ModelIndex k, RandomSource& rng) const {
    return params_.initial_mean[k.value] + std::sqrt(params_.initial_variance[k.value]) * rng.normal();
  }
  double log_initial_density(double x, ModelIndex k) const {
    return gaussian_log_pdf(x, params_.initial_mean[k.value], params_.initial_variance[k.value]);
  }
  double sample_transition(double x_prev, ModelIndex k, RandomSource& rng) const {
    return params_.a[k.value] * x_prev + params_.c[k.value] + std::sqrt(params_.process_variance) * rng.normal();
  }
  double log_transition_density(double x, double x_prev, ModelIndex k) const {
    return gaussian_log_pdf(x, params_.a[k.value] * x_prev + params_.c[k.value], params_.process_variance);
  }
  double sample_observation(double x, ModelIndex k, RandomSource& rng) const {
    return params_.h[k.value] * x + params_.d[k.value] + std::sqrt(params_.observation_variance) * rng.normal();
  }
  double log_likelihood(double y, double x, ModelIndex k) const {
    return gaussian_log_pdf(y, params_.h[k.value] * x + params_.d[k.value], params_.observation_variance);
  }

 private:
  LinearGaussianParams params_;
};

static_assert(CandidateModelSet<LinearGaussianModelSet>);

/// Kalman filter output along one model sequence. Index t runs over 0..T.
struct ConditionalPosterior {
  std::vector<double> mean;
  std::vector<double> variance;
  /// log p(y_{1:t} | M_{0:t}); entry 0 is 0.
  std::vector<double> log_evidence;
};

/// Exact state posterior and evidence given the model sequence M_0..M_T (`sequence.size() == T + 1`).
inline ConditionalPosterior conditional_gaussian_filter(std::span<const double> observations,
                                                        std::span<const ModelIndex> sequence,
                                                        const LinearGaussianModelSet& models) {
  if (sequence.size() != observations.size() + 1) {
    throw ConfigError("model sequence must have one more entry than the observations");
  }
  const auto& p = models.params();
  ConditionalPosterior out;
  const std::size_t horizon = observations.size();
  out.mean.reserve(horizon + 1);
  out.variance.reserve(horizon + 1);
  out.log_evidence.reserve(horizon + 1);
  double mean = p.initial_mean[sequence[0].value];
  double variance = p.initial_variance[sequence[0].value];
  double log_evidence = 0.0;
  out.mean.push_back(mean);
  out.variance.push_back(variance);
  out.log_evidence.push_back(0.0);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::size_t k = sequence[t].value;
    const double predicted_mean = p.a[k] * mean + p.c[k];
    const double predicted_variance = p.a[k] * p.a[k] * variance + p.process_variance;
    const double innovation = observations[t - 1] - (p.h[k] * predicted_mean + p.d[k]);
    const double innovation_variance = p.h[k] * p.h[k] * predicted_variance + p.observation_variance;
    log_evidence += gaussian_log_pdf(innovation, 0.0, innovation_variance);
    const double gain = predicted_variance * p.h[k] / innovation_variance;
    mean = predicted_mean + gain * innovation;
    variance = (1.0 - gain * p.h[k]) * predicted_variance;
    out.mean.push_back(mean);
    out.variance.push_back(variance);
    out.log_evidence.push_back(log_evidence);
  }
  return out;
}

/// log p(M_0, ..., M_t) for an explicit sequence, computed from the whole sequence.
inline double log_sequence_prior(std::span<const ModelIndex> sequence, const RegimeDynamics& dynamics) {
  if (sequence.empty()) {
    return 0.0;
  }
  double total = std::log(dynamics.initial_probabilities()[sequence[0].value]);
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        for (std::size_t t = 1; t < sequence.size(); ++t) {
          const std::size_t k = sequence[t].value;
          if constexpr (std::is_same_v<T, IndependentDynamics>) {
            total += std::log(kind.probabilities[k]);
          } else if constexpr (std::is_same_v<T, MarkovDynamics>) {
            total += std::log(kind.matrix(sequence[t - 1].value, k));
          } else {
            double numerator = kind.beta[k];
            double denominator = 0.0;
            for (const auto b : kind.beta) {
              denominator += b;
            }
            for (std::size_t tau = 0; tau < t; ++tau) {
              numerator += sequence[tau].value == k ? 1.0 : 0.0;
              denominator += 1.0;
            }
            total += std::log(numerator / denominator);
          }
        }
      },
      dynamics.kind());
  return total;
}

/// Exact filtering quantities at each t = 1..T.
struct ExactPosterior {
  /// model_posteriors[t - 1][k] = p(M_t = k | y_{1:t}).
  std::vector<std::vector<double>> model_posteriors;
  /// E[x_t | y_{1:t}].
  std::vector<double> state_mean;
  /// Var[x_t | y_{1:t}].
  std::vector<double> state_variance;
};

/// Thrown when the enumeration would exceed `kMaxSequences`.
class InstanceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::size_t kMaxSequences = 1'000'000;

/// Calls `visit(sequence)` for every sequence in {0..K-1}^length, last entry varying fastest.
template <class Visitor>
void for_each_sequence(std::size_t model_count, std::size_t length, Visitor&& visit) {
  std::vector<ModelIndex> sequence(length);
  while (true) {
    visit(std::span<const ModelIndex>{sequence});
    std::size_t position = length;
    while (position > 0) {
      --position;
      if (++sequence[position].value < model_count) {
        break;
      }
      sequence[position].value = 0;
      if (position == 0) {
        return;
      }
    }
    if (length == 0) {
      return;
    }
  }
}

/// Exact p(M_t | y_{1:t}) and the first two moments of p(x_t | y_{1:t}) by enumerating all
/// model sequences. The time-t marginal comes from the length-(t+1) enumeration over y_{1:t}.
inline ExactPosterior enumerate_exact(std::span<const double> observations, const LinearGaussianModelSet& models,
                                      const RegimeDynamics& dynamics) {
  const std::size_t model_count = models.size();
  if (dynamics.size() != model_count) {
    throw ConfigError("model set and regime dynamics disagree on the number of models");
  }
  const std::size_t horizon = observations.size();
  const double sequences = std::pow(static_cast<double>(model_count), static_cast<double>(horizon + 1));
  if (sequences > static_cast<double>(kMaxSequences)) {
    throw InstanceTooLarge("exact enumeration needs K^(T+1) <= 1e6 sequences");
  }

  ExactPosterior exact;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto prefix = observations.first(t);
    std::vector<double> log_joint;
    std::vector<std::size_t> last_model;
    std::vector<double> means;
    std::vector<double> variances;
    for_each_sequence(model_count, t + 1, [&](std::span<const ModelIndex> sequence) {
      const double log_prior = log_sequence_prior(sequence, dynamics);
      if (std::isinf(log_prior)) {
        return;
      }
      const auto conditional = conditional_gaussian_filter(prefix, sequence, models);
      log_joint.push_back(log_prior + conditional.log_evidence.back());
      last_model.push_back(sequence.back().value);
      means.push_back(conditional.mean.back());
      variances.push_back(conditional.variance.back());
    });
    double max = -std::numeric_limits<double>::infinity();
    for (const double v : log_joint) {
      max = std::max(max, v);
    }
    double total = 0.0;
    for (const double v : log_joint) {
      total += std::exp(v - max);
    }
    std::vector<double> posterior(model_count, 0.0);
    double mean = 0.0;
    double second_moment = 0.0;
    for (std::size_t i = 0; i < log_joint.size(); ++i) {
      const double w = std::exp(log_joint[i] - max) / total;
      posterior[last_model[i]] += w;
      mean += w * means[i];
      second_moment += w * (variances[i] + means[i] * means[i]);
    }
    exact.model_posteriors.push_back(std::move(posterior));
    exact.state_mean.push_back(mean);
    exact.state_variance.push_back(second_moment - mean * mean);
  }
  return exact;
}

}  // namespace rspf::oracle

#endif
