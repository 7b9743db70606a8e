#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <rspf/harness/scenario.hpp>
#include <rspf/mmpf.hpp>
#include <rspf/synthetic.hpp>

#include "reference_filter.hpp"

namespace {

using rspf::ModelIndex;

std::vector<double> benchmark_observations(std::size_t horizon, std::uint64_t seed) {
  rspf::harness::Scenario scenario;
  scenario.horizon = horizon;
  return rspf::harness::generate_trajectory(scenario, seed).trajectory.observations;
}

TEST(Mmpf, GammaZeroUsesInstantaneousEvidenceOnly) {
  const auto models = rspf::make_benchmark_model_set();
  const auto observations = benchmark_observations(8, 1);
  // With gamma = 0, pi_t depends only on L_t. Two banks sharing seeds but with different
  // histories of pi must agree at every step.
  auto bank = rspf::make_filter_bank(models, 0.0, 50, 7);
  auto perturbed = rspf::make_filter_bank(models, 0.0, 50, 7);
  perturbed.log_model_probabilities = {std::log(0.9), std::log(0.1 / 7), std::log(0.1 / 7), std::log(0.1 / 7),
                                       std::log(0.1 / 7), std::log(0.1 / 7), std::log(0.1 / 7), std::log(0.1 / 7)};
  for (const double y : observations) {
    const auto a = rspf::mmpf_step(bank, y, models);
    const auto b = rspf::mmpf_step(perturbed, y, models);
    EXPECT_EQ(a.model_posteriors, b.model_posteriors);
    EXPECT_EQ(a.state_estimate, b.state_estimate);
  }
}

TEST(Mmpf, GammaOneAccumulatesFullEvidence) {
  const auto models = rspf::make_benchmark_model_set();
  const auto observations = benchmark_observations(6, 2);
  auto bank = rspf::make_filter_bank(models, 1.0, 40, 3);
  // Track sum_t log L_{k,t} by replaying each filter's likelihood computation with gamma = 0:
  // under gamma = 0 the normalized pi_t equals L_t / sum_j L_{j,t}.
  auto instantaneous = rspf::make_filter_bank(models, 0.0, 40, 3);
  std::vector<double> log_product(8, 0.0);
  for (const double y : observations) {
    const auto full = rspf::mmpf_step(bank, y, models);
    const auto now = rspf::mmpf_step(instantaneous, y, models);
    for (std::size_t k = 0; k < 8; ++k) {
      log_product[k] += std::log(now.model_posteriors[k]);
    }
    const auto expected = rspf::normalize_weights(log_product);
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_NEAR(full.model_posteriors[k], std::exp(expected[k]), 1e-9);
    }
  }
}

TEST(Mmpf, ProbabilitiesStayNormalized) {
  const auto models = rspf::make_benchmark_model_set();
  for (const double gamma : {0.0, 0.5, 0.9, 1.0}) {
    const auto outputs = rspf::mmpf_run<rspf::SyntheticModelSet>(benchmark_observations(30, 4), models, gamma, 250, 9);
    for (const auto& output : outputs) {
      double sum = 0.0;
      for (const double p : output.model_posteriors) {
        EXPECT_GE(p, 0.0);
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
      EXPECT_LE(output.ess, 2000.0 + 1e-9);
    }
  }
}

TEST(Mmpf, BankSizeMatchesParticleBudget) {
  const auto bank = rspf::make_filter_bank(rspf::make_benchmark_model_set(), 0.5, 250, 1);
  std::size_t total = 0;
  for (const auto& filter : bank.filters) {
    total += filter.states.size();
  }
  EXPECT_EQ(bank.filters.size(), 8U);
  EXPECT_EQ(total, 2000U);
  EXPECT_THROW(rspf::make_filter_bank(rspf::make_benchmark_model_set(), 1.5, 250, 1), rspf::ConfigError);
  EXPECT_THROW(rspf::make_filter_bank(rspf::make_benchmark_model_set(), 0.5, 0, 1), rspf::ConfigError);
}

TEST(Mmpf, SameSeedIsBitwiseReproducible) {
  const auto models = rspf::make_benchmark_model_set();
  const auto observations = benchmark_observations(20, 5);
  const auto a = rspf::mmpf_run<rspf::SyntheticModelSet>(observations, models, 0.9, 100, 42);
  const auto b = rspf::mmpf_run<rspf::SyntheticModelSet>(observations, models, 0.9, 100, 42);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].state_estimate, b[t].state_estimate);
    EXPECT_EQ(a[t].model_posteriors, b[t].model_posteriors);
  }
}

TEST(Mmpf, SingleModelReducesToBootstrapFilter) {
  rspf::SyntheticModelParams params;
  params.a = {0.7};
  params.b = {0.5};
  params.c = {0.3};
  params.d = {-0.2};
  const rspf::SyntheticModelSet models{params};
  const std::vector<double> observations{0.1, 0.4, -0.3, 0.9, 0.2, 0.0, 0.5};
  for (const double gamma : {0.0, 1.0}) {
    const auto outputs = rspf::mmpf_run<rspf::SyntheticModelSet>(observations, models, gamma, 301, 77);
    rspf::RandomSource rng{rspf::derive_seed(77, 0)};
    const auto reference = rspf::testing::reference_bootstrap_filter(observations, models, ModelIndex{0}, 301, rng);
    for (std::size_t t = 0; t < observations.size(); ++t) {
      EXPECT_EQ(outputs[t].state_estimate, reference[t]);
      EXPECT_EQ(outputs[t].model_posteriors, std::vector<double>{1.0});
    }
  }
}

}  // namespace
