#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <rspf/harness/experiment.hpp>
#include <rspf/harness/metrics.hpp>
#include <rspf/harness/output.hpp>
#include <rspf/harness/scenario.hpp>

namespace {

using rspf::ModelIndex;
namespace harness = rspf::harness;

std::vector<ModelIndex> models_of(std::vector<std::size_t> one_based) {
  std::vector<ModelIndex> out;
  for (const auto k : one_based) {
    out.push_back(ModelIndex::from_one_based(k));
  }
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream file{path, std::ios::binary};
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

TEST(Metrics, Mse) {
  const std::vector<double> truth{0.3, -1.0, 2.0};
  EXPECT_DOUBLE_EQ(harness::mse(truth, truth), 0.0);
  EXPECT_NEAR(harness::mse(truth, std::vector{0.8, -0.5, 2.5}), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(harness::mse(std::vector{0.0, 0.0}, std::vector{1.0, 3.0}), 5.0);
  EXPECT_EQ(harness::cumulative_squared_error(std::vector{0.0, 0.0}, std::vector{1.0, 3.0}), (std::vector{1.0, 10.0}));
  EXPECT_THROW(harness::mse(std::vector{1.0}, std::vector{1.0, 2.0}), rspf::ConfigError);
}

TEST(Metrics, ModelAccuracy) {
  const auto truth = models_of({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(harness::model_accuracy(truth, truth), 1.0);
  EXPECT_DOUBLE_EQ(harness::model_accuracy(truth, models_of({2, 3, 4, 1})), 0.0);
  std::vector<ModelIndex> long_truth(50, ModelIndex{0});
  auto estimate = long_truth;
  for (std::size_t t = 0; t < 4; ++t) {
    estimate[t * 10] = ModelIndex{3};
  }
  EXPECT_DOUBLE_EQ(harness::model_accuracy(long_truth, estimate), 0.92);
}

TEST(Metrics, SummaryOrdering) {
  const std::vector<double> values{0.1, 0.1, 0.1};
  const auto mse = harness::summarize(values, true);
  EXPECT_LE(mse.best, mse.average);
  EXPECT_LE(mse.average, mse.worst);
  const auto accuracy = harness::summarize(std::vector{0.5, 0.9, 1.0}, false);
  EXPECT_DOUBLE_EQ(accuracy.best, 1.0);
  EXPECT_DOUBLE_EQ(accuracy.worst, 0.5);
  EXPECT_NEAR(accuracy.average, 0.8, 1e-15);
}

TEST(Scenario, RandomPermutation) {
  rspf::RandomSource rng{1};
  for (int trial = 0; trial < 50; ++trial) {
    auto p = harness::random_permutation(8, rng);
    std::sort(p.begin(), p.end());
    EXPECT_EQ(p, (std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8}));
  }
}

TEST(Scenario, TrajectoryShapeAndDeterminism) {
  harness::Scenario scenario;
  const auto a = harness::generate_trajectory(scenario, 5);
  const auto b = harness::generate_trajectory(scenario, 5);
  EXPECT_EQ(a.trajectory.models, b.trajectory.models);
  EXPECT_EQ(a.trajectory.states, b.trajectory.states);
  EXPECT_EQ(a.trajectory.observations, b.trajectory.observations);
  EXPECT_EQ(a.trajectory.states.size(), 51U);
  EXPECT_EQ(a.trajectory.observations.size(), 50U);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const double x0 = harness::generate_trajectory(scenario, seed).trajectory.states[0];
    EXPECT_GE(x0, -0.5);
    EXPECT_LE(x0, 0.5);
  }
}

TEST(Scenario, MarkovSelfTransitionFrequency) {
  harness::Scenario scenario;
  scenario.horizon = 100'000;
  const auto run = harness::generate_trajectory(scenario, 7);
  const auto& models = run.trajectory.models;
  std::size_t stays = 0;
  for (std::size_t t = 1; t < models.size(); ++t) {
    stays += models[t] == models[t - 1] ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(stays) / static_cast<double>(models.size() - 1), 0.80, 0.01);
}

TEST(Scenario, PolyaReinforcesHeavyModel) {
  harness::Scenario scenario;
  scenario.kind = harness::ScenarioKind::kPolya;
  scenario.polya_beta = std::vector<std::uint32_t>{8, 1, 1, 1, 1, 1, 1, 1};
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    for (const auto k : harness::generate_trajectory(scenario, seed).trajectory.models) {
      hits += k.value == 0 ? 1 : 0;
      ++total;
    }
  }
  EXPECT_GT(static_cast<double>(hits) / static_cast<double>(total), 0.125 + 0.05);
}

TEST(Scenario, PolyaDrawsPermutationPerRun) {
  harness::Scenario scenario;
  scenario.kind = harness::ScenarioKind::kPolya;
  const auto a = harness::generate_trajectory(scenario, 1);
  const auto b = harness::generate_trajectory(scenario, 2);
  const auto beta_a = std::get<rspf::PolyaDynamics>(a.dynamics.kind()).beta;
  const auto beta_b = std::get<rspf::PolyaDynamics>(b.dynamics.kind()).beta;
  EXPECT_NE(beta_a, beta_b);
  auto sorted = beta_a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(TrajectoryCsv, RoundTripsExactly) {
  harness::Scenario scenario;
  scenario.horizon = 12;
  const auto generated = harness::generate_trajectory(scenario, 3).trajectory;
  std::stringstream csv;
  harness::write_trajectory_csv(csv, generated);
  const auto parsed = harness::read_trajectory_csv(csv);
  EXPECT_EQ(parsed.models, generated.models);
  EXPECT_EQ(parsed.states, generated.states);
  EXPECT_EQ(parsed.observations, generated.observations);

  std::stringstream bad{"t,x\n0,1\n"};
  EXPECT_THROW(harness::read_trajectory_csv(bad), rspf::ConfigError);
}

harness::ExperimentConfig small_experiment(std::size_t jobs) {
  harness::ExperimentConfig cfg;
  cfg.scenario.horizon = 50;
  cfg.runs = 4;
  cfg.particles = 160;
  cfg.base_seed = 31;
  cfg.jobs = jobs;
  return cfg;
}

TEST(Experiment, PairedTrajectoriesAndSeeds) {
  const auto cfg = small_experiment(1);
  const auto result = harness::run_experiment(cfg);
  ASSERT_EQ(result.records.size(), 4U);
  for (const auto& record : result.records) {
    EXPECT_EQ(record.seed, harness::run_seed(cfg.base_seed, record.run));
    const auto expected = harness::generate_trajectory(cfg.scenario, rspf::derive_seed(record.seed, "trajectory"));
    EXPECT_EQ(record.truth.observations, expected.trajectory.observations);
    ASSERT_EQ(record.methods.size(), 7U);
    for (const auto& method : record.methods) {
      ASSERT_TRUE(method.ok);
      EXPECT_EQ(method.state_estimates.size(), 50U);
      EXPECT_GE(method.mse, 0.0);
      EXPECT_GE(method.accuracy, 0.0);
      EXPECT_LE(method.accuracy, 1.0);
    }
  }
  for (const auto& summary : result.summaries) {
    EXPECT_EQ(summary.completed, 4U);
    EXPECT_LE(summary.mse.best, summary.mse.average);
    EXPECT_LE(summary.mse.average, summary.mse.worst);
    EXPECT_LE(summary.accuracy.worst, summary.accuracy.average);
    EXPECT_LE(summary.accuracy.average, summary.accuracy.best);
    EXPECT_TRUE(std::is_sorted(summary.mean_cumulative_mse.begin(), summary.mean_cumulative_mse.end()));
  }
}

TEST(Experiment, AddingAMethodDoesNotPerturbOthers) {
  auto cfg = small_experiment(1);
  cfg.methods = {harness::rspf_method(rspf::ProposalStrategy::kUniform)};
  const auto alone = harness::run_experiment(cfg);
  cfg.methods = {harness::mmpf_method(0.5), harness::rspf_method(rspf::ProposalStrategy::kUniform)};
  const auto together = harness::run_experiment(cfg);
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    EXPECT_EQ(alone.records[r].methods[0].state_estimates, together.records[r].methods[1].state_estimates);
  }
}

TEST(Experiment, MethodNames) {
  std::vector<std::string> names;
  for (const auto& m : harness::benchmark_methods()) {
    names.push_back(m.name);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"rspf-deterministic", "rspf-uniform", "rspf-bootstrap", "mmpf-gamma-0",
                                             "mmpf-gamma-0.5", "mmpf-gamma-0.9", "mmpf-gamma-1"}));
}

TEST(Experiment, OutputsAreDeterministicAcrossJobCounts) {
  const auto base = std::filesystem::temp_directory_path() / "rspf_test_outputs";
  std::filesystem::remove_all(base);
  for (const auto& [name, jobs] : std::vector<std::pair<std::string, std::size_t>>{{"a", 1}, {"b", 1}, {"c", 3}}) {
    const auto cfg = small_experiment(jobs);
    harness::emit_outputs(cfg, harness::run_experiment(cfg), base / name);
  }
  for (const auto* file : {"summary.csv", "runs.csv", "cumulative_mse.csv", "cumulative_mse.svg"}) {
    const auto reference = slurp(base / "a" / file);
    EXPECT_FALSE(reference.empty());
    EXPECT_EQ(reference, slurp(base / "b" / file)) << file;
    EXPECT_EQ(reference, slurp(base / "c" / file)) << file;
  }
  EXPECT_EQ(count_lines(slurp(base / "a" / "summary.csv")), 1U + 7U);
  EXPECT_EQ(count_lines(slurp(base / "a" / "cumulative_mse.csv")), 1U + 50U);
  EXPECT_EQ(count_lines(slurp(base / "a" / "runs.csv")), 1U + 4U * 7U);
  std::filesystem::remove_all(base);
}

TEST(Experiment, RejectsEmptyConfigurations) {
  auto cfg = small_experiment(1);
  cfg.runs = 0;
  EXPECT_THROW(harness::run_experiment(cfg), rspf::ConfigError);
  cfg.runs = 1;
  cfg.methods.clear();
  EXPECT_THROW(harness::run_experiment(cfg), rspf::ConfigError);
}

TEST(Output, RealsUseSeventeenSignificantDigits) {
  EXPECT_EQ(harness::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(harness::format_real(2.0), "2");
  EXPECT_EQ(std::stod(harness::format_real(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
