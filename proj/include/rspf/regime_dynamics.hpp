#ifndef RSPF_REGIME_DYNAMICS_HPP
#define RSPF_REGIME_DYNAMICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include <rspf/random.hpp>
#include <rspf/ssm.hpp>

/**
 * \file
 * \brief Priors over model sequences p(M_t | M_{0:t-1}) and the model-index proposals.
 *
 * Three regime dynamics are supported: independent draws, a Markov chain with a transition
 * matrix, and a Polya urn whose transition probabilities grow with past visit counts. All three
 * are functions of the summary (last model, visit counts), which is what particles carry.
 */

namespace rspf {

inline constexpr double kProbabilityTolerance = 1e-12;

/// Sufficient statistic of a model history M_0, ..., M_{t-1}.
struct RegimeHistorySummary {
  ModelIndex last_model{};
  std::vector<std::uint32_t> visit_counts;
  /// Number of recorded models; equals the sum of `visit_counts`.
  std::size_t t = 0;

  static RegimeHistorySummary empty(std::size_t model_count) {
    return RegimeHistorySummary{ModelIndex{}, std::vector<std::uint32_t>(model_count, 0U), 0};
  }

  /// Builds the summary of an explicit sequence.
  static RegimeHistorySummary of(std::size_t model_count, std::span<const ModelIndex> sequence) {
    auto summary = empty(model_count);
    for (const auto k : sequence) {
      summary.record(k);
    }
    return summary;
  }

  void record(ModelIndex k) {
    last_model = k;
    ++visit_counts[k.value];
    ++t;
  }

  /// Throws `ConfigError` unless the summary is a valid history over `model_count` models.
  void validate(std::size_t model_count) const {
    if (visit_counts.size() != model_count) {
      throw ConfigError("history summary has the wrong number of models");
    }
    const auto total = std::accumulate(visit_counts.begin(), visit_counts.end(), std::uint64_t{0});
    if (total != t) {
      throw ConfigError("history summary counts do not sum to its length");
    }
    if (t > 0) {
      check_model_index(last_model, model_count);
      if (visit_counts[last_model.value] == 0) {
        throw ConfigError("history summary last model was never visited");
      }
    }
  }
};

/// Row-stochastic K x K matrix, p(M_t = j | M_{t-1} = i) at (i, j).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  explicit TransitionMatrix(std::vector<std::vector<double>> rows) {
    const auto size = rows.size();
    if (size == 0) {
      throw ConfigError("transition matrix must be non-empty");
    }
    size_ = size;
    probabilities_.reserve(size * size);
    for (const auto& row : rows) {
      if (row.size() != size) {
        throw ConfigError("transition matrix must be square");
      }
      double sum = 0.0;
      for (const double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ConfigError("transition probabilities must lie in [0, 1]");
        }
        sum += p;
        probabilities_.push_back(p);
      }
      if (std::abs(sum - 1.0) > kProbabilityTolerance) {
        throw ConfigError("transition matrix rows must sum to 1");
      }
    }
  }

  std::size_t size() const { return size_; }
  double operator()(std::size_t from, std::size_t to) const { return probabilities_[from * size_ + to]; }
  std::span<const double> row(std::size_t from) const { return {probabilities_.data() + from * size_, size_}; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < size_; ++i) {
      out.emplace_back(row(i).begin(), row(i).end());
    }
    return out;
  }

 private:
  std::size_t size_ = 0;
  std::vector<double> probabilities_;
};

/// Cyclic banded matrix: `diagonal` on the diagonal, `super_diagonal` one step to the right
/// (wrapping from the last row to the first column), and the remainder spread evenly elsewhere.
inline TransitionMatrix banded_transition_matrix(std::size_t size, double diagonal, double super_diagonal) {
  if (size < 3) {
    throw ConfigError("banded transition matrix needs at least three models");
  }
  const double epsilon = (1.0 - diagonal - super_diagonal) / static_cast<double>(size - 2);
  std::vector<std::vector<double>> rows(size, std::vector<double>(size, epsilon));
  for (std::size_t i = 0; i < size; ++i) {
    rows[i][i] = diagonal;
    rows[i][(i + 1) % size] = super_diagonal;
  }
  return TransitionMatrix{std::move(rows)};
}

/// The benchmark matrix: K = 8, 0.80 on the diagonal, 0.15 above it, 1/120 elsewhere.
inline TransitionMatrix benchmark_transition_matrix() { return banded_transition_matrix(8, 0.80, 0.15); }

/// p(M_t = k | M_{0:t-1}) = p_k for every t.
struct IndependentDynamics {
  std::vector<double> probabilities;
};

/// p(M_t = k | M_{0:t-1}) = P(M_{t-1}, k).
struct MarkovDynamics {
  TransitionMatrix matrix;
};

/// p(M_t = k | M_{0:t-1}) = (beta_k + n_k) / sum_j (beta_j + n_j), n_k counting M_0 .. M_{t-1}.
struct PolyaDynamics {
  std::vector<std::uint32_t> beta;
};

namespace detail {

inline void validate_probabilities(std::span<const double> p, std::string_view what) {
  double sum = 0.0;
  for (const double value : p) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ConfigError(std::string{what} + ": probabilities must lie in [0, 1]");
    }
    sum += value;
  }
  if (p.empty() || std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw ConfigError(std::string{what} + ": probabilities must sum to 1");
  }
}

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

/// Inverse-CDF categorical draw from unnormalized nonnegative `weights` with positive `total`.
/// A single category consumes no randomness.
inline std::size_t sample_categorical(std::span<const double> weights, double total, RandomSource& rng) {
  if (weights.size() == 1) {
    return 0;
  }
  const double target = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      last_positive = i;
      cumulative += weights[i];
      if (target < cumulative) {
        return i;
      }
    }
  }
  return last_positive;
}

}  // namespace detail

/// A model-sequence prior: one of the three dynamics plus the initial distribution p(M_0).
class RegimeDynamics {
 public:
  using Kind = std::variant<IndependentDynamics, MarkovDynamics, PolyaDynamics>;

  /// Independent draws. p(M_0) defaults to the same vector.
  static RegimeDynamics independent(std::vector<double> probabilities, std::vector<double> initial = {}) {
    if (initial.empty()) {
      initial = probabilities;
    }
    detail::validate_probabilities(probabilities, "independent dynamics");
    return RegimeDynamics{IndependentDynamics{std::move(probabilities)}, std::move(initial)};
  }

  /// Markov switching. p(M_0) defaults to uniform.
  static RegimeDynamics markov(TransitionMatrix matrix, std::vector<double> initial = {}) {
    return RegimeDynamics{MarkovDynamics{std::move(matrix)}, std::move(initial)};
  }

  /// Polya urn with pseudo-counts `beta` (every entry at least 1). p(M_0) defaults to uniform.
  static RegimeDynamics polya(std::vector<std::uint32_t> beta, std::vector<double> initial = {}) {
    for (const auto b : beta) {
      if (b < 1) {
        throw ConfigError("polya pseudo-counts must be positive integers");
      }
    }
    if (beta.empty()) {
      throw ConfigError("polya dynamics needs at least one model");
    }
    return RegimeDynamics{PolyaDynamics{std::move(beta)}, std::move(initial)};
  }

  std::size_t size() const { return initial_.size(); }
  const Kind& kind() const { return kind_; }
  std::span<const double> initial_probabilities() const { return initial_; }

  /// Writes p(M_t = k | history) for every k into `out` (length K). No validation.
  void prior_probabilities(const RegimeHistorySummary& history, std::span<double> out) const {
    if (history.t == 0) {
      std::copy(initial_.begin(), initial_.end(), out.begin());
      return;
    }
    std::visit(
        [&](const auto& dynamics) {
          using T = std::decay_t<decltype(dynamics)>;
          if constexpr (std::is_same_v<T, IndependentDynamics>) {
            std::copy(dynamics.probabilities.begin(), dynamics.probabilities.end(), out.begin());
          } else if constexpr (std::is_same_v<T, MarkovDynamics>) {
            const auto row = dynamics.matrix.row(history.last_model.value);
            std::copy(row.begin(), row.end(), out.begin());
          } else {
            const double total = static_cast<double>(beta_total_ + history.t);
            for (std::size_t k = 0; k < out.size(); ++k) {
              out[k] = static_cast<double>(dynamics.beta[k] + history.visit_counts[k]) / total;
            }
          }
        },
        kind_);
  }

  /// log p(M_t = k | history). No validation.
  double log_prior_unchecked(ModelIndex k, const RegimeHistorySummary& history) const {
    if (history.t == 0) {
      return log_initial_[k.value];
    }
    return std::visit(
        [&](const auto& dynamics) -> double {
          using T = std::decay_t<decltype(dynamics)>;
          if constexpr (std::is_same_v<T, IndependentDynamics>) {
            return log_probabilities_[k.value];
          } else if constexpr (std::is_same_v<T, MarkovDynamics>) {
            return log_probabilities_[history.last_model.value * size() + k.value];
          } else {
            return std::log(static_cast<double>(dynamics.beta[k.value] + history.visit_counts[k.value])) -
                   std::log(static_cast<double>(beta_total_ + history.t));
          }
        },
        kind_);
  }

  /// Draws M_t from p(M_t | history). `scratch` must hold K values.
  ModelIndex sample(const RegimeHistorySummary& history, std::span<double> scratch, RandomSource& rng) const {
    prior_probabilities(history, scratch);
    return ModelIndex{detail::sample_categorical(scratch, 1.0, rng)};
  }

 private:
  RegimeDynamics(Kind kind, std::vector<double> initial) : kind_{std::move(kind)}, initial_{std::move(initial)} {
    const std::size_t size = std::visit(
        [](const auto& dynamics) -> std::size_t {
          using T = std::decay_t<decltype(dynamics)>;
          if constexpr (std::is_same_v<T, IndependentDynamics>) {
            return dynamics.probabilities.size();
          } else if constexpr (std::is_same_v<T, MarkovDynamics>) {
            return dynamics.matrix.size();
          } else {
            return dynamics.beta.size();
          }
        },
        kind_);
    if (size == 0) {
      throw ConfigError("regime dynamics needs at least one model");
    }
    if (initial_.empty()) {
      initial_.assign(size, 1.0 / static_cast<double>(size));
    }
    if (initial_.size() != size) {
      throw ConfigError("initial model distribution has the wrong length");
    }
    detail::validate_probabilities(initial_, "initial model distribution");
    for (const double p : initial_) {
      log_initial_.push_back(detail::safe_log(p));
    }
    if (const auto* independent = std::get_if<IndependentDynamics>(&kind_)) {
      for (const double p : independent->probabilities) {
        log_probabilities_.push_back(detail::safe_log(p));
      }
    } else if (const auto* markov = std::get_if<MarkovDynamics>(&kind_)) {
      for (std::size_t i = 0; i < size; ++i) {
        for (const double p : markov->matrix.row(i)) {
          log_probabilities_.push_back(detail::safe_log(p));
        }
      }
    } else if (const auto* polya = std::get_if<PolyaDynamics>(&kind_)) {
      beta_total_ = std::accumulate(polya->beta.begin(), polya->beta.end(), std::uint64_t{0});
    }
  }

  Kind kind_;
  std::vector<double> initial_;
  std::vector<double> log_initial_;
  std::vector<double> log_probabilities_;
  std::uint64_t beta_total_ = 0;
};

/// log p(M_t = k | M_{0:t-1}) for the history summarized by `history`. At t = 0 this is log p(M_0 = k).
inline double log_prior(ModelIndex k, const RegimeHistorySummary& history, const RegimeDynamics& dynamics) {
  check_model_index(k, dynamics.size());
  history.validate(dynamics.size());
  return dynamics.log_prior_unchecked(k, history);
}

/// Draws M_t ~ p(M_t | M_{0:t-1}).
inline ModelIndex sample_prior(const RegimeHistorySummary& history, const RegimeDynamics& dynamics, RandomSource& rng) {
  history.validate(dynamics.size());
  std::vector<double> scratch(dynamics.size());
  return dynamics.sample(history, scratch, rng);
}

/// How particles pick their model index at each step.
enum class ProposalStrategy {
  kBootstrap,      ///< q = p(M_t | M_{0:t-1})
  kUniform,        ///< q = 1/K
  kDeterministic,  ///< particle n gets model n mod K; weighted as if q = 1/K
};

inline std::string_view to_string(ProposalStrategy strategy) {
  switch (strategy) {
    case ProposalStrategy::kBootstrap:
      return "bootstrap";
    case ProposalStrategy::kUniform:
      return "uniform";
    case ProposalStrategy::kDeterministic:
      return "deterministic";
  }
  return "unknown";
}

inline ProposalStrategy parse_proposal_strategy(std::string_view name) {
  if (name == "bootstrap") {
    return ProposalStrategy::kBootstrap;
  }
  if (name == "uniform") {
    return ProposalStrategy::kUniform;
  }
  if (name == "deterministic") {
    return ProposalStrategy::kDeterministic;
  }
  throw ConfigError("unknown proposal strategy '" + std::string{name} + "'");
}

/// Proposes one model per history and writes its log-proposal probability.
/**
 * Deterministic allocation gives particle n the model n mod K, so when K does not divide N the
 * first N mod K models receive one extra particle. Uniform and deterministic proposals both
 * report log q = -log K.
 */
inline void propose_models(ProposalStrategy strategy, std::span<const RegimeHistorySummary> histories,
                           const RegimeDynamics& dynamics, RandomSource& rng, std::span<ModelIndex> models,
                           std::span<double> log_proposals) {
  const std::size_t model_count = dynamics.size();
  const double log_uniform = -std::log(static_cast<double>(model_count));
  switch (strategy) {
    case ProposalStrategy::kBootstrap: {
      std::vector<double> scratch(model_count);
      for (std::size_t n = 0; n < histories.size(); ++n) {
        models[n] = dynamics.sample(histories[n], scratch, rng);
        log_proposals[n] = detail::safe_log(scratch[models[n].value]);
      }
      return;
    }
    case ProposalStrategy::kUniform:
      for (std::size_t n = 0; n < histories.size(); ++n) {
        models[n] = ModelIndex{model_count == 1 ? 0 : rng.uniform_index(model_count)};
        log_proposals[n] = log_uniform;
      }
      return;
    case ProposalStrategy::kDeterministic:
      for (std::size_t n = 0; n < histories.size(); ++n) {
        models[n] = ModelIndex{n % model_count};
        log_proposals[n] = log_uniform;
      }
      return;
  }
  throw ConfigError("unknown proposal strategy");
}

/// Result of `propose_models` in owning form.
struct Proposal {
  std::vector<ModelIndex> models;
  std::vector<double> log_proposals;
};

inline Proposal propose_models(ProposalStrategy strategy, std::span<const RegimeHistorySummary> histories,
                               const RegimeDynamics& dynamics, RandomSource& rng) {
  if (histories.empty()) {
    throw ConfigError("propose_models needs at least one history");
  }
  for (const auto& history : histories) {
    history.validate(dynamics.size());
  }
  Proposal proposal{std::vector<ModelIndex>(histories.size()), std::vector<double>(histories.size())};
  propose_models(strategy, histories, dynamics, rng, proposal.models, proposal.log_proposals);
  return proposal;
}

/// JSON forms: {"type": "independent", "probabilities": [...]},
/// {"type": "markov", "matrix": [[...], ...]}, {"type": "polya", "beta": [...]};
/// each with an optional "initial" probability vector.
inline RegimeDynamics regime_dynamics_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  auto initial = j.value("initial", std::vector<double>{});
  if (type == "independent") {
    return RegimeDynamics::independent(j.at("probabilities").get<std::vector<double>>(), std::move(initial));
  }
  if (type == "markov") {
    return RegimeDynamics::markov(TransitionMatrix{j.at("matrix").get<std::vector<std::vector<double>>>()},
                                  std::move(initial));
  }
  if (type == "polya") {
    return RegimeDynamics::polya(j.at("beta").get<std::vector<std::uint32_t>>(), std::move(initial));
  }
  throw ConfigError("unknown regime dynamics type '" + type + "'");
}

inline nlohmann::json regime_dynamics_to_json(const RegimeDynamics& dynamics) {
  nlohmann::json j;
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, IndependentDynamics>) {
          j = {{"type", "independent"}, {"probabilities", kind.probabilities}};
        } else if constexpr (std::is_same_v<T, MarkovDynamics>) {
          j = {{"type", "markov"}, {"matrix", kind.matrix.rows()}};
        } else {
          j = {{"type", "polya"}, {"beta", kind.beta}};
        }
      },
      dynamics.kind());
  j["initial"] = std::vector<double>(dynamics.initial_probabilities().begin(), dynamics.initial_probabilities().end());
  return j;
}

}  // namespace rspf

#endif
