#ifndef RSPF_FILTER_HPP
#define RSPF_FILTER_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <rspf/random.hpp>
#include <rspf/regime_dynamics.hpp>
#include <rspf/resample.hpp>
#include <rspf/ssm.hpp>
#include <rspf/weights.hpp>

/**
 * \file
 * \brief The regime switching particle filter.
 *
 * Each particle carries a state, its current model index and a summary of its model history.
 * One step proposes a model per particle, propagates the state through that model's transition
 * (bootstrap state proposal), and multiplies the weight by
 *
 *   p(y_t | x_t, M_t) p(M_t | M_{0:t-1}) / q(M_t | M_{0:t-1}).
 *
 * Model posteriors, the MAP model and the posterior-mean state are read off the normalized
 * weights before resampling.
 */

namespace rspf {

/// When to resample after weighting.
struct ResamplePolicy {
  enum class Kind { kAlways, kEssBelowFraction };
  Kind kind = Kind::kAlways;
  /// Resample when ESS < fraction * N (only for kEssBelowFraction).
  double fraction = 0.5;

  static ResamplePolicy always() { return {}; }
  static ResamplePolicy ess_below_fraction(double fraction) { return {Kind::kEssBelowFraction, fraction}; }

  bool should_resample(double ess, std::size_t particle_count) const {
    return kind == Kind::kAlways || ess < fraction * static_cast<double>(particle_count);
  }
};

struct FilterConfig {
  std::size_t particle_count = 2000;
  ProposalStrategy proposal = ProposalStrategy::kDeterministic;
  ResamplePolicy resample = ResamplePolicy::always();
  std::uint64_t seed = 0;

  void validate() const {
    if (particle_count == 0) {
      throw ConfigError("particle count must be at least 1");
    }
    if (resample.kind == ResamplePolicy::Kind::kEssBelowFraction && !(resample.fraction > 0.0 && resample.fraction <= 1.0)) {
      throw ConfigError("ESS fraction must lie in (0, 1]");
    }
  }
};

/// {"particles": 2000, "proposal": "deterministic", "resample": "always" | {"ess_below": 0.5}, "seed": 0}
inline void from_json(const nlohmann::json& j, FilterConfig& cfg) {
  cfg.particle_count = j.value("particles", cfg.particle_count);
  if (j.contains("proposal")) {
    cfg.proposal = parse_proposal_strategy(j.at("proposal").get<std::string>());
  }
  if (j.contains("resample")) {
    const auto& resample = j.at("resample");
    if (resample.is_string() && resample.get<std::string>() == "always") {
      cfg.resample = ResamplePolicy::always();
    } else if (resample.is_object() && resample.contains("ess_below")) {
      cfg.resample = ResamplePolicy::ess_below_fraction(resample.at("ess_below").get<double>());
    } else {
      throw ConfigError("resample must be \"always\" or {\"ess_below\": fraction}");
    }
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
}

inline void to_json(nlohmann::json& j, const FilterConfig& cfg) {
  j = {{"particles", cfg.particle_count}, {"proposal", std::string{to_string(cfg.proposal)}}, {"seed", cfg.seed}};
  if (cfg.resample.kind == ResamplePolicy::Kind::kAlways) {
    j["resample"] = "always";
  } else {
    j["resample"] = {{"ess_below", cfg.resample.fraction}};
  }
}

template <class State>
struct Particle {
  State state;
  ModelIndex model;
  RegimeHistorySummary regime_history;
};

template <class State>
struct ParticleSystem {
  std::vector<Particle<State>> particles;
  /// Log-weights; normalized after every step.
  std::vector<double> log_weights;
  /// Log-weight increments of the most recent step, per particle.
  std::vector<double> log_increments;
  std::size_t t = 0;
  /// Reused storage for resampling.
  std::vector<Particle<State>> buffer;

  std::size_t size() const { return particles.size(); }

  /// Linear-space normalized weights.
  std::vector<double> weights() const {
    std::vector<double> out(log_weights.size());
    for (std::size_t n = 0; n < out.size(); ++n) {
      out[n] = std::exp(log_weights[n]);
    }
    return out;
  }
};

template <class State>
struct FilterOutput {
  std::size_t t = 0;
  State state_estimate{};
  std::vector<double> model_posteriors;
  ModelIndex map_model{};
  double ess = 0.0;
};

/// p(M_t = k | y_{1:t}) estimate: the weight mass sitting on each model.
template <class State>
std::vector<double> model_posterior(const ParticleSystem<State>& system, std::size_t model_count) {
  std::vector<double> posterior(model_count, 0.0);
  for (std::size_t n = 0; n < system.size(); ++n) {
    posterior[system.particles[n].model.value] += std::exp(system.log_weights[n]);
  }
  double total = 0.0;
  for (const double p : posterior) {
    total += p;
  }
  for (auto& p : posterior) {
    p /= total;
  }
  return posterior;
}

/// Argmax of `posteriors`; ties go to the smallest index.
inline ModelIndex map_model(std::span<const double> posteriors) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < posteriors.size(); ++k) {
    if (posteriors[k] > posteriors[best]) {
      best = k;
    }
  }
  return ModelIndex{best};
}

/// Weighted mean of the particle states.
template <class State>
State state_estimate(const ParticleSystem<State>& system) {
  State estimate = system.particles.front().state * std::exp(system.log_weights.front());
  for (std::size_t n = 1; n < system.size(); ++n) {
    estimate = estimate + system.particles[n].state * std::exp(system.log_weights[n]);
  }
  return estimate;
}

/// Replaces the particles by N i.i.d. multinomial draws and resets weights to 1/N.
/// Survivors copy their state, model and regime history.
template <class State>
void multinomial_resample(ParticleSystem<State>& system, RandomSource& rng) {
  const std::size_t count = system.size();
  const auto weights = system.weights();
  std::vector<std::size_t> ancestors(count);
  std::vector<double> cumulative;
  multinomial_ancestors(weights, rng, ancestors, cumulative);
  // Copy-assignment into the buffer reuses each history's storage.
  system.buffer.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    system.buffer[n] = system.particles[ancestors[n]];
  }
  std::swap(system.particles, system.buffer);
  std::fill(system.log_weights.begin(), system.log_weights.end(), -std::log(static_cast<double>(count)));
}

/// log p(y | x, k) + log p(k | history) - log q(k | history).
template <CandidateModelSet Models>
double log_weight_increment(const Models& models, const RegimeDynamics& dynamics,
                            const typename Models::observation_type& y, const typename Models::state_type& x,
                            ModelIndex k, const RegimeHistorySummary& history, double log_proposal) {
  return models.log_likelihood(y, x, k) + dynamics.log_prior_unchecked(k, history) - log_proposal;
}

/// Draws M_0 ~ p(M_0) and x_0 ~ p(x_0 | M_0) for every particle; weights 1/N.
template <CandidateModelSet Models>
ParticleSystem<typename Models::state_type> initialize(const Models& models, const RegimeDynamics& dynamics,
                                                       const FilterConfig& cfg, RandomSource& rng) {
  cfg.validate();
  if (models.size() != dynamics.size()) {
    throw ConfigError("model set and regime dynamics disagree on the number of models");
  }
  const std::size_t count = cfg.particle_count;
  const std::size_t model_count = models.size();
  ParticleSystem<typename Models::state_type> system;
  system.particles.reserve(count);
  const auto initial = dynamics.initial_probabilities();
  for (std::size_t n = 0; n < count; ++n) {
    const ModelIndex k{detail::sample_categorical(initial, 1.0, rng)};
    auto history = RegimeHistorySummary::empty(model_count);
    history.record(k);
    system.particles.push_back({models.sample_initial(k, rng), k, std::move(history)});
  }
  system.log_weights.assign(count, -std::log(static_cast<double>(count)));
  system.log_increments.assign(count, 0.0);
  return system;
}

/// Advances `system` from t-1 to t with observation `y` and returns the filter outputs at t.
/**
 * Random draws happen in a fixed order: all model proposals (particle order), then all state
 * transitions (particle order), then resampling. Throws `DegenerateWeightsError` carrying t if
 * every weight vanishes.
 */
template <CandidateModelSet Models>
FilterOutput<typename Models::state_type> step(ParticleSystem<typename Models::state_type>& system,
                                               const typename Models::observation_type& y, const Models& models,
                                               const RegimeDynamics& dynamics, const FilterConfig& cfg,
                                               RandomSource& rng) {
  const std::size_t count = system.size();
  const std::size_t model_count = models.size();
  const std::size_t t = system.t + 1;

  std::vector<RegimeHistorySummary> histories;
  std::vector<ModelIndex> proposed(count);
  std::vector<double> log_proposals(count);
  // Only the bootstrap proposal needs the histories; the others read nothing from them.
  if (cfg.proposal == ProposalStrategy::kBootstrap) {
    histories.reserve(count);
    for (const auto& particle : system.particles) {
      histories.push_back(particle.regime_history);
    }
  } else {
    histories.resize(count);
  }
  propose_models(cfg.proposal, histories, dynamics, rng, proposed, log_proposals);

  system.log_increments.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    auto& particle = system.particles[n];
    const ModelIndex k = proposed[n];
    particle.state = models.sample_transition(particle.state, k, rng);
    const double increment =
        log_weight_increment(models, dynamics, y, particle.state, k, particle.regime_history, log_proposals[n]);
    system.log_increments[n] = increment;
    system.log_weights[n] += increment;
    particle.model = k;
    particle.regime_history.record(k);
  }
  system.t = t;

  normalize_log_weights(system.log_weights, t);

  FilterOutput<typename Models::state_type> output;
  output.t = t;
  output.model_posteriors = model_posterior(system, model_count);
  output.map_model = map_model(output.model_posteriors);
  output.state_estimate = state_estimate(system);
  output.ess = effective_sample_size(system.weights());

  if (cfg.resample.should_resample(output.ess, count)) {
    multinomial_resample(system, rng);
  }
  return output;
}

/// Runs the filter over `observations` (y_1, ..., y_T) with a generator seeded by `cfg.seed`.
template <CandidateModelSet Models>
std::vector<FilterOutput<typename Models::state_type>> run_filter(
    std::span<const typename Models::observation_type> observations, const Models& models,
    const RegimeDynamics& dynamics, const FilterConfig& cfg) {
  if (observations.empty()) {
    throw ConfigError("run_filter needs at least one observation");
  }
  RandomSource rng{cfg.seed};
  auto system = initialize(models, dynamics, cfg, rng);
  std::vector<FilterOutput<typename Models::state_type>> outputs;
  outputs.reserve(observations.size());
  for (const auto& y : observations) {
    outputs.push_back(step(system, y, models, dynamics, cfg, rng));
  }
  return outputs;
}

}  // namespace rspf

#endif
