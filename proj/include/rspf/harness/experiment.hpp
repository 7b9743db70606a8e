#ifndef RSPF_HARNESS_EXPERIMENT_HPP
#define RSPF_HARNESS_EXPERIMENT_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include <rspf/filter.hpp>
#include <rspf/harness/metrics.hpp>
#include <rspf/harness/scenario.hpp>
#include <rspf/mmpf.hpp>
#include <rspf/random.hpp>
#include <rspf/synthetic.hpp>

/**
 * \file
 * \brief Monte Carlo comparison of filters on the synthetic benchmark.
 *
 * Run r uses seed `derive_seed(base_seed, r)`. Every method in a run sees the same trajectory,
 * generated from the run's "trajectory" sub-stream, and draws its own randomness from the
 * sub-stream named after the method. Results depend only on the base seed, never on the number
 * of worker threads.
 */

namespace rspf::harness {

enum class MethodKind { kRspf, kMmpf };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::kRspf;
  ProposalStrategy proposal = ProposalStrategy::kDeterministic;
  double gamma = 0.0;
};

inline MethodSpec rspf_method(ProposalStrategy proposal) {
  return {"rspf-" + std::string{to_string(proposal)}, MethodKind::kRspf, proposal, 0.0};
}

inline std::string format_gamma(double gamma) {
  auto text = nlohmann::json(gamma).dump();
  if (text.size() > 2 && text.ends_with(".0")) {
    text.resize(text.size() - 2);
  }
  return text;
}

inline MethodSpec mmpf_method(double gamma) {
  return {"mmpf-gamma-" + format_gamma(gamma), MethodKind::kMmpf, ProposalStrategy::kDeterministic, gamma};
}

/// Three RSPF proposals and MMPF with gamma in {0, 0.5, 0.9, 1}.
inline std::vector<MethodSpec> benchmark_methods() {
  return {rspf_method(ProposalStrategy::kDeterministic), rspf_method(ProposalStrategy::kUniform),
          rspf_method(ProposalStrategy::kBootstrap),     mmpf_method(0.0),
          mmpf_method(0.5),                              mmpf_method(0.9),
          mmpf_method(1.0)};
}

struct ExperimentConfig {
  Scenario scenario{};
  std::vector<MethodSpec> methods = benchmark_methods();
  std::size_t runs = 500;
  /// Total particle budget; MMPF gives each of its K filters particles / K.
  std::size_t particles = 2000;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  /// Dynamics handed to the filters instead of the true ones (robustness studies).
  std::optional<RegimeDynamics> filter_dynamics;
};

/// Per-method result of one run.
struct MethodRun {
  bool ok = false;
  std::string error;
  std::vector<double> state_estimates;
  std::vector<ModelIndex> map_models;
  std::vector<double> cumulative_squared_error;
  double mse = 0.0;
  double accuracy = 0.0;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  Trajectory truth;
  /// Indexed like `ExperimentConfig::methods`.
  std::vector<MethodRun> methods;
};

struct MethodSummary {
  std::string name;
  std::size_t completed = 0;
  std::size_t failures = 0;
  MetricSummary mse;
  MetricSummary accuracy;
  /// Mean over completed runs of the cumulative squared error, t = 1..T.
  std::vector<double> mean_cumulative_mse;
};

struct ExperimentResult {
  std::size_t horizon = 0;
  std::vector<MethodSummary> summaries;
  std::vector<RunRecord> records;
};

inline std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run) { return derive_seed(base_seed, run); }

/// Runs one method on one generated trajectory.
inline MethodRun run_method(const MethodSpec& method, const GeneratedRun& generated, const SyntheticModelSet& models,
                            const RegimeDynamics& dynamics, std::size_t particles, std::uint64_t seed) {
  MethodRun result;
  const auto& truth = generated.trajectory;
  const std::uint64_t method_seed = derive_seed(seed, method.name);
  try {
    std::vector<FilterOutput<double>> outputs;
    if (method.kind == MethodKind::kRspf) {
      FilterConfig cfg;
      cfg.particle_count = particles;
      cfg.proposal = method.proposal;
      cfg.seed = method_seed;
      outputs = run_filter<SyntheticModelSet>(truth.observations, models, dynamics, cfg);
    } else {
      outputs = mmpf_run<SyntheticModelSet>(truth.observations, models, method.gamma,
                                            std::max<std::size_t>(1, particles / models.size()), method_seed);
    }
    for (const auto& output : outputs) {
      result.state_estimates.push_back(output.state_estimate);
      result.map_models.push_back(output.map_model);
    }
    const std::span<const double> true_states{truth.states.data() + 1, truth.states.size() - 1};
    const std::span<const ModelIndex> true_models{truth.models.data() + 1, truth.models.size() - 1};
    result.cumulative_squared_error = cumulative_squared_error(true_states, result.state_estimates);
    result.mse = result.cumulative_squared_error.back() / static_cast<double>(true_states.size());
    result.accuracy = model_accuracy(true_models, result.map_models);
    result.ok = true;
  } catch (const DegenerateWeightsError& e) {
    result.error = e.what();
  }
  return result;
}

inline RunRecord run_single(const ExperimentConfig& cfg, const SyntheticModelSet& models, std::size_t run) {
  RunRecord record;
  record.run = run;
  record.seed = run_seed(cfg.base_seed, run);
  const auto generated = generate_trajectory(cfg.scenario, derive_seed(record.seed, "trajectory"));
  const auto& dynamics = cfg.filter_dynamics ? *cfg.filter_dynamics : generated.dynamics;
  record.methods.reserve(cfg.methods.size());
  for (const auto& method : cfg.methods) {
    record.methods.push_back(run_method(method, generated, models, dynamics, cfg.particles, record.seed));
  }
  record.truth = generated.trajectory;
  return record;
}

/// Aggregates records in run order.
inline std::vector<MethodSummary> summarize_runs(const ExperimentConfig& cfg, std::span<const RunRecord> records) {
  std::vector<MethodSummary> summaries;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodSummary summary;
    summary.name = cfg.methods[m].name;
    summary.mean_cumulative_mse.assign(cfg.scenario.horizon, 0.0);
    std::vector<double> mses;
    std::vector<double> accuracies;
    for (const auto& record : records) {
      const auto& run = record.methods[m];
      if (!run.ok) {
        ++summary.failures;
        continue;
      }
      mses.push_back(run.mse);
      accuracies.push_back(run.accuracy);
      for (std::size_t t = 0; t < summary.mean_cumulative_mse.size(); ++t) {
        summary.mean_cumulative_mse[t] += run.cumulative_squared_error[t];
      }
    }
    summary.completed = mses.size();
    if (summary.completed > 0) {
      for (double& v : summary.mean_cumulative_mse) {
        v /= static_cast<double>(summary.completed);
      }
    }
    summary.mse = summarize(mses, true);
    summary.accuracy = summarize(accuracies, false);
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

/// Runs `cfg.runs` Monte Carlo runs on `cfg.jobs` worker threads.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.runs == 0) {
    throw ConfigError("experiment needs at least one run");
  }
  if (cfg.methods.empty()) {
    throw ConfigError("experiment needs at least one method");
  }
  const SyntheticModelSet models{cfg.scenario.params};
  ExperimentResult result;
  result.horizon = cfg.scenario.horizon;
  result.records.resize(cfg.runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t run = next++; run < cfg.runs; run = next++) {
        result.records[run] = run_single(cfg, models, run);
      }
    } catch (...) {
      const std::lock_guard lock{failure_mutex};
      if (!failure) {
        failure = std::current_exception();
      }
      next = cfg.runs;
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, cfg.runs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  result.summaries = summarize_runs(cfg, result.records);
  return result;
}

}  // namespace rspf::harness

#endif
