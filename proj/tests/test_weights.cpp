#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <rspf/random.hpp>
#include <rspf/resample.hpp>
#include <rspf/weights.hpp>

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(NormalizeWeights, Examples) {
  const auto halves = rspf::normalize_weights(std::vector{std::log(2.0), std::log(2.0)});
  EXPECT_DOUBLE_EQ(halves[0], std::log(0.5));
  EXPECT_DOUBLE_EQ(halves[1], std::log(0.5));

  const auto one_hot = rspf::normalize_weights(std::vector{0.0, -kInf});
  EXPECT_EQ(one_hot[0], 0.0);
  EXPECT_EQ(one_hot[1], -kInf);

  for (const double a : {-800.0, -3.0, 0.0, 12.5, 700.0}) {
    for (const double v : rspf::normalize_weights(std::vector{a, a, a, a})) {
      EXPECT_NEAR(v, std::log(0.25), 1e-12);
    }
  }
}

TEST(NormalizeWeights, SurvivesUnderflow) {
  const auto w = rspf::normalize_weights(std::vector{-2000.0, -2001.0});
  EXPECT_NEAR(std::exp(w[0]) + std::exp(w[1]), 1.0, 1e-12);
  EXPECT_NEAR(std::exp(w[0]), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(NormalizeWeights, DegenerateWeightsCarryTime) {
  try {
    rspf::normalize_weights(std::vector{-kInf, -kInf}, 17);
    FAIL() << "expected DegenerateWeightsError";
  } catch (const rspf::DegenerateWeightsError& e) {
    EXPECT_EQ(e.t(), 17U);
  }
  EXPECT_THROW(rspf::normalize_weights(std::vector{std::nan(""), 0.0}), rspf::DegenerateWeightsError);
}

TEST(EffectiveSampleSize, Examples) {
  EXPECT_DOUBLE_EQ(rspf::effective_sample_size(std::vector(10, 0.1)), 10.0);
  EXPECT_DOUBLE_EQ(rspf::effective_sample_size(std::vector{0.0, 1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(rspf::effective_sample_size(std::vector{0.5, 0.5, 0.0, 0.0}), 2.0);
}

TEST(MultinomialAncestors, OneHotWeightCopiesOneParticle) {
  rspf::RandomSource rng{1};
  const auto ancestors = rspf::multinomial_ancestors(std::vector{0.0, 0.0, 1.0, 0.0}, 4, rng);
  EXPECT_EQ(ancestors, (std::vector<std::size_t>{2, 2, 2, 2}));
}

TEST(MultinomialAncestors, FairCoinForTwoUniformParticles) {
  rspf::RandomSource rng{2};
  constexpr int kRepetitions = 1'000'000;
  int first = 0;
  for (int i = 0; i < kRepetitions; ++i) {
    for (const auto a : rspf::multinomial_ancestors(std::vector{0.5, 0.5}, 2, rng)) {
      first += a == 0 ? 1 : 0;
    }
  }
  const double draws = 2.0 * kRepetitions;
  EXPECT_NEAR(first / draws, 0.5, 4.0 * std::sqrt(0.25 / draws));
}

TEST(MultinomialAncestors, ExpectedOffspringIsNTimesWeight) {
  const std::vector<double> weights{0.05, 0.4, 0.15, 0.3, 0.1};
  const std::size_t count = weights.size();
  rspf::RandomSource rng{3};
  constexpr int kRepetitions = 10'000;
  std::vector<double> offspring(count, 0.0);
  for (int i = 0; i < kRepetitions; ++i) {
    for (const auto a : rspf::multinomial_ancestors(weights, count, rng)) {
      offspring[a] += 1.0;
    }
  }
  for (std::size_t n = 0; n < count; ++n) {
    const double expected = static_cast<double>(count) * weights[n];
    // Offspring count per repetition is Binomial(N, w).
    const double standard_error = std::sqrt(static_cast<double>(count) * weights[n] * (1.0 - weights[n]) / kRepetitions);
    EXPECT_NEAR(offspring[n] / kRepetitions, expected, 4.0 * standard_error);
  }
}

}  // namespace
