#ifndef RSPF_MMPF_HPP
#define RSPF_MMPF_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <rspf/filter.hpp>
#include <rspf/random.hpp>
#include <rspf/resample.hpp>
#include <rspf/ssm.hpp>
#include <rspf/weights.hpp>

/**
 * \file
 * \brief Multiple model particle filter (MMPF): one bootstrap filter per candidate model, fused
 * through model probabilities with a forgetting factor.
 *
 * Filter k always propagates with model k. At each step it yields the evidence estimate
 * L_{k,t} = mean of its unnormalized weights, and the model probabilities update as
 *
 *   pi_{k,t}  proportional to  pi_{k,t-1}^gamma * L_{k,t}.
 *
 * gamma = 0 uses only the instantaneous likelihood, gamma = 1 the full evidence product. The fused
 * estimate is sum_k pi_{k,t} xhat_{k,t}. Filters never exchange particles.
 */

namespace rspf {

/// Bootstrap filter pinned to one model.
template <class State>
struct ModelFilter {
  ModelIndex model;
  std::vector<State> states;
  std::vector<double> log_weights;
  RandomSource rng;
  std::vector<State> buffer;
};

template <class State>
struct FilterBank {
  std::vector<ModelFilter<State>> filters;
  /// log pi_t.
  std::vector<double> log_model_probabilities;
  double gamma = 0.0;
  std::size_t t = 0;

  std::vector<double> model_probabilities() const {
    std::vector<double> out(log_model_probabilities.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = std::exp(log_model_probabilities[k]);
    }
    return out;
  }
};

/// Builds a bank with `particles_per_model` particles per filter and uniform pi_0.
/// Filter k draws from its own stream `derive_seed(seed, k)`.
template <CandidateModelSet Models>
FilterBank<typename Models::state_type> make_filter_bank(const Models& models, double gamma,
                                                         std::size_t particles_per_model, std::uint64_t seed) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("forgetting factor must lie in [0, 1]");
  }
  if (particles_per_model == 0) {
    throw ConfigError("particles per model must be at least 1");
  }
  const std::size_t model_count = models.size();
  FilterBank<typename Models::state_type> bank;
  bank.gamma = gamma;
  bank.log_model_probabilities.assign(model_count, -std::log(static_cast<double>(model_count)));
  bank.filters.reserve(model_count);
  for (std::size_t k = 0; k < model_count; ++k) {
    ModelFilter<typename Models::state_type> filter{ModelIndex{k}, {}, {}, RandomSource{derive_seed(seed, k)}, {}};
    filter.states.reserve(particles_per_model);
    for (std::size_t n = 0; n < particles_per_model; ++n) {
      filter.states.push_back(models.sample_initial(filter.model, filter.rng));
    }
    filter.log_weights.assign(particles_per_model, -std::log(static_cast<double>(particles_per_model)));
    bank.filters.push_back(std::move(filter));
  }
  return bank;
}

/// Advances every filter one bootstrap step, fuses, and resamples every filter.
template <CandidateModelSet Models>
FilterOutput<typename Models::state_type> mmpf_step(FilterBank<typename Models::state_type>& bank,
                                                    const typename Models::observation_type& y, const Models& models) {
  using State = typename Models::state_type;
  const std::size_t t = bank.t + 1;
  const std::size_t model_count = bank.filters.size();
  std::vector<State> estimates;
  estimates.reserve(model_count);
  double ess = 0.0;
  std::vector<double> weights;
  std::vector<std::size_t> ancestors;
  std::vector<double> cumulative;

  for (std::size_t k = 0; k < model_count; ++k) {
    auto& filter = bank.filters[k];
    const std::size_t count = filter.states.size();
    for (std::size_t n = 0; n < count; ++n) {
      filter.states[n] = models.sample_transition(filter.states[n], filter.model, filter.rng);
      filter.log_weights[n] += models.log_likelihood(y, filter.states[n], filter.model);
    }
    // Previous weights are 1/N after resampling, so the sum is the mean of the likelihoods.
    const double log_evidence = log_sum_exp(filter.log_weights);

    double log_pi = bank.gamma == 0.0 ? 0.0 : bank.gamma * bank.log_model_probabilities[k];
    if (bank.gamma > 0.0 && std::isinf(bank.log_model_probabilities[k])) {
      log_pi = -std::numeric_limits<double>::infinity();
    }
    bank.log_model_probabilities[k] = log_pi + log_evidence;

    if (std::isfinite(log_evidence)) {
      normalize_log_weights(filter.log_weights, t);
    } else {
      // This filter lost every particle; keep it alive with flat weights so it can recover.
      std::fill(filter.log_weights.begin(), filter.log_weights.end(), -std::log(static_cast<double>(count)));
    }
    weights.resize(count);
    State estimate = filter.states.front() * std::exp(filter.log_weights.front());
    weights[0] = std::exp(filter.log_weights[0]);
    for (std::size_t n = 1; n < count; ++n) {
      weights[n] = std::exp(filter.log_weights[n]);
      estimate = estimate + filter.states[n] * weights[n];
    }
    estimates.push_back(estimate);
    ess += effective_sample_size(weights);

    ancestors.resize(count);
    multinomial_ancestors(weights, filter.rng, ancestors, cumulative);
    filter.buffer.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
      filter.buffer[n] = filter.states[ancestors[n]];
    }
    std::swap(filter.states, filter.buffer);
    std::fill(filter.log_weights.begin(), filter.log_weights.end(), -std::log(static_cast<double>(count)));
  }

  normalize_log_weights(bank.log_model_probabilities, t);
  bank.t = t;

  FilterOutput<State> output;
  output.t = t;
  output.model_posteriors = bank.model_probabilities();
  output.map_model = map_model(output.model_posteriors);
  output.state_estimate = estimates.front() * output.model_posteriors.front();
  for (std::size_t k = 1; k < model_count; ++k) {
    output.state_estimate = output.state_estimate + estimates[k] * output.model_posteriors[k];
  }
  output.ess = ess;
  return output;
}

/// Runs the bank over `observations` (y_1, ..., y_T).
template <CandidateModelSet Models>
std::vector<FilterOutput<typename Models::state_type>> mmpf_run(
    std::span<const typename Models::observation_type> observations, const Models& models, double gamma,
    std::size_t particles_per_model, std::uint64_t seed) {
  if (observations.empty()) {
    throw ConfigError("mmpf_run needs at least one observation");
  }
  auto bank = make_filter_bank(models, gamma, particles_per_model, seed);
  std::vector<FilterOutput<typename Models::state_type>> outputs;
  outputs.reserve(observations.size());
  for (const auto& y : observations) {
    outputs.push_back(mmpf_step(bank, y, models));
  }
  return outputs;
}

}  // namespace rspf

#endif
