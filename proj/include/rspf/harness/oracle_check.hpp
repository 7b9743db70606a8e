#ifndef RSPF_HARNESS_ORACLE_CHECK_HPP
#define RSPF_HARNESS_ORACLE_CHECK_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <rspf/filter.hpp>
#include <rspf/oracle.hpp>
#include <rspf/random.hpp>
#include <rspf/regime_dynamics.hpp>

/**
 * \file
 * \brief Compares the particle filter against exact enumeration on a two-model linear-Gaussian
 * instance, for every regime dynamics and every model proposal.
 */

namespace rspf::harness {

struct OracleCheckConfig {
  std::size_t particles = 100'000;
  std::size_t repetitions = 20;
  std::size_t horizon = 5;
  std::uint64_t seed = 2024;
};

struct OracleCheckCase {
  std::string dynamics;
  ProposalStrategy proposal = ProposalStrategy::kDeterministic;
  /// Largest total-variation distance to the exact model posterior over all t and repetitions.
  double max_total_variation = 0.0;
  /// Largest |mean over repetitions - exact mean| / standard error over t.
  double max_state_z = 0.0;
};

/// The two-model instance: distinct offsets, shared noise levels.
inline oracle::LinearGaussianModelSet oracle_model_set() {
  oracle::LinearGaussianParams params;
  params.a = {0.9, 0.5};
  params.c = {0.5, -0.5};
  params.h = {1.0, 1.0};
  params.d = {0.0, 0.0};
  params.initial_mean = {0.0, 0.0};
  params.initial_variance = {1.0, 1.0};
  params.process_variance = 0.2;
  params.observation_variance = 0.3;
  return oracle::LinearGaussianModelSet{params};
}

/// Independent (0.6, 0.4), Markov with 0.9 persistence, and Polya with beta = (2, 1).
inline std::vector<std::pair<std::string, RegimeDynamics>> oracle_dynamics() {
  std::vector<std::pair<std::string, RegimeDynamics>> out;
  out.emplace_back("independent", RegimeDynamics::independent({0.6, 0.4}));
  out.emplace_back("markov", RegimeDynamics::markov(TransitionMatrix{{{0.9, 0.1}, {0.1, 0.9}}}));
  out.emplace_back("polya", RegimeDynamics::polya({2, 1}));
  return out;
}

/// Samples y_1..y_T from the generative model.
template <CandidateModelSet Models>
std::vector<typename Models::observation_type> simulate_observations(const Models& models,
                                                                     const RegimeDynamics& dynamics,
                                                                     std::size_t horizon, RandomSource& rng) {
  std::vector<double> scratch(models.size());
  auto history = RegimeHistorySummary::empty(models.size());
  auto model = dynamics.sample(history, scratch, rng);
  auto state = models.sample_initial(model, rng);
  history.record(model);
  std::vector<typename Models::observation_type> observations;
  for (std::size_t t = 1; t <= horizon; ++t) {
    model = dynamics.sample(history, scratch, rng);
    state = models.sample_transition(state, model, rng);
    observations.push_back(models.sample_observation(state, model, rng));
    history.record(model);
  }
  return observations;
}

inline std::vector<OracleCheckCase> run_oracle_check(const OracleCheckConfig& cfg) {
  const auto models = oracle_model_set();
  std::vector<OracleCheckCase> cases;
  for (const auto& [name, dynamics] : oracle_dynamics()) {
    RandomSource data_rng{derive_seed(cfg.seed, name)};
    const auto observations = simulate_observations(models, dynamics, cfg.horizon, data_rng);
    const auto exact = oracle::enumerate_exact(observations, models, dynamics);
    for (const auto proposal :
         {ProposalStrategy::kBootstrap, ProposalStrategy::kUniform, ProposalStrategy::kDeterministic}) {
      OracleCheckCase result{name, proposal};
      std::vector<std::vector<double>> estimates(cfg.horizon);
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        FilterConfig filter_cfg;
        filter_cfg.particle_count = cfg.particles;
        filter_cfg.proposal = proposal;
        filter_cfg.seed = derive_seed(derive_seed(cfg.seed, name + "/" + std::string{to_string(proposal)}), rep);
        const auto outputs = run_filter<oracle::LinearGaussianModelSet>(observations, models, dynamics, filter_cfg);
        for (std::size_t t = 0; t < cfg.horizon; ++t) {
          double total_variation = 0.0;
          for (std::size_t k = 0; k < models.size(); ++k) {
            total_variation += std::abs(outputs[t].model_posteriors[k] - exact.model_posteriors[t][k]);
          }
          result.max_total_variation = std::max(result.max_total_variation, 0.5 * total_variation);
          estimates[t].push_back(outputs[t].state_estimate);
        }
      }
      for (std::size_t t = 0; t < cfg.horizon; ++t) {
        const double reps = static_cast<double>(estimates[t].size());
        double mean = 0.0;
        for (const double v : estimates[t]) {
          mean += v;
        }
        mean /= reps;
        double sum_squares = 0.0;
        for (const double v : estimates[t]) {
          sum_squares += (v - mean) * (v - mean);
        }
        const double standard_error = std::sqrt(sum_squares / (reps - 1.0) / reps);
        result.max_state_z = std::max(result.max_state_z, std::abs(mean - exact.state_mean[t]) / standard_error);
      }
      cases.push_back(result);
    }
  }
  return cases;
}

}  // namespace rspf::harness

#endif
