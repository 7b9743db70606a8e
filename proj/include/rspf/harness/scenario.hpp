#ifndef RSPF_HARNESS_SCENARIO_HPP
#define RSPF_HARNESS_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <rspf/random.hpp>
#include <rspf/regime_dynamics.hpp>
#include <rspf/synthetic.hpp>

namespace rspf::harness {

enum class ScenarioKind { kMarkov, kPolya };

inline std::string_view to_string(ScenarioKind kind) { return kind == ScenarioKind::kMarkov ? "markov" : "polya"; }

inline ScenarioKind parse_scenario(std::string_view name) {
  if (name == "markov") {
    return ScenarioKind::kMarkov;
  }
  if (name == "polya") {
    return ScenarioKind::kPolya;
  }
  throw ConfigError("unknown scenario '" + std::string{name} + "'");
}

/// Benchmark setting: the eight-model family under Markov or Polya switching.
struct Scenario {
  ScenarioKind kind = ScenarioKind::kMarkov;
  std::size_t horizon = 50;
  SyntheticModelParams params{};
  /// Polya only: fixed pseudo-counts instead of a per-run random permutation of 1..K.
  std::optional<std::vector<std::uint32_t>> polya_beta;
};

/// One simulated sequence. `models` and `states` hold t = 0..T, `observations` t = 1..T.
struct Trajectory {
  std::vector<ModelIndex> models;
  std::vector<double> states;
  std::vector<double> observations;
};

/// A trajectory plus the regime dynamics that generated it.
struct GeneratedRun {
  Trajectory trajectory;
  RegimeDynamics dynamics;
};

/// Uniformly random permutation of 1..count (Fisher-Yates on `rng`).
inline std::vector<std::uint32_t> random_permutation(std::size_t count, RandomSource& rng) {
  std::vector<std::uint32_t> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = static_cast<std::uint32_t>(i + 1);
  }
  for (std::size_t i = count; i > 1; --i) {
    std::swap(values[i - 1], values[rng.uniform_index(i)]);
  }
  return values;
}

/// Ancestral sampling of M_{0:T}, x_{0:T} and y_{1:T} with a generator seeded by `seed`.
/**
 * Draw order: Polya pseudo-counts (when random), then M_0, x_0, then per t the model, the state
 * and the observation.
 */
inline GeneratedRun generate_trajectory(const Scenario& scenario, std::uint64_t seed) {
  const SyntheticModelSet models{scenario.params};
  const std::size_t model_count = models.size();
  RandomSource rng{seed};

  auto dynamics = [&] {
    if (scenario.kind == ScenarioKind::kMarkov) {
      return RegimeDynamics::markov(model_count == 8 ? benchmark_transition_matrix()
                                                     : banded_transition_matrix(model_count, 0.80, 0.15));
    }
    return RegimeDynamics::polya(scenario.polya_beta ? *scenario.polya_beta : random_permutation(model_count, rng));
  }();

  Trajectory trajectory;
  trajectory.models.reserve(scenario.horizon + 1);
  trajectory.states.reserve(scenario.horizon + 1);
  trajectory.observations.reserve(scenario.horizon);
  std::vector<double> scratch(model_count);
  auto history = RegimeHistorySummary::empty(model_count);

  ModelIndex model = dynamics.sample(history, scratch, rng);
  double state = models.sample_initial(model, rng);
  history.record(model);
  trajectory.models.push_back(model);
  trajectory.states.push_back(state);
  for (std::size_t t = 1; t <= scenario.horizon; ++t) {
    model = dynamics.sample(history, scratch, rng);
    state = models.sample_transition(state, model, rng);
    const double y = models.sample_observation(state, model, rng);
    history.record(model);
    trajectory.models.push_back(model);
    trajectory.states.push_back(state);
    trajectory.observations.push_back(y);
  }
  return {std::move(trajectory), std::move(dynamics)};
}

}  // namespace rspf::harness

#endif
