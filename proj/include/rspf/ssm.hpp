#ifndef RSPF_SSM_HPP
#define RSPF_SSM_HPP

#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include <rspf/random.hpp>

/**
 * \file
 * \brief Core state-space-model vocabulary: model indices, Gaussian densities and the candidate
 * model set concept.
 */

namespace rspf {

/// Index of one of the K candidate models.
/**
 * Stored zero-based. Files and CLI output use one-based numbering (`one_based()`).
 */
struct ModelIndex {
  std::size_t value = 0;

  constexpr std::size_t one_based() const { return value + 1; }
  static constexpr ModelIndex from_one_based(std::size_t k) { return ModelIndex{k - 1}; }

  friend constexpr bool operator==(ModelIndex, ModelIndex) = default;
  friend constexpr auto operator<=>(ModelIndex, ModelIndex) = default;
};

/// Thrown when a numeric argument is outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown on invalid configuration (unknown tags, bad shapes, out-of-range parameters).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// log N(y; mean, variance).
inline double gaussian_log_pdf(double y, double mean, double variance) {
  if (!(variance > 0.0)) {
    throw DomainError("gaussian_log_pdf: variance must be positive");
  }
  const double residual = y - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * residual * residual / variance;
}

/// A finite family of K state-space models sharing state and observation spaces.
/**
 * Each model k pairs a sampler with a log-density for its initial state p(x_0 | M_0 = k), its
 * transition p(x_t | x_{t-1}, M_t = k) and its observation p(y_t | x_t, M_t = k). Implementations
 * are immutable; all randomness comes from the `RandomSource` argument.
 *
 * `state_type` only needs `state * double` and `state + state`, which is enough to form the
 * weighted posterior mean. Scalars and Eigen vectors both qualify.
 */
template <class M>
concept CandidateModelSet =
    requires(const M& models, const typename M::state_type& x, const typename M::observation_type& y,
             ModelIndex k, RandomSource& rng) {
      typename M::state_type;
      typename M::observation_type;
      { models.size() } -> std::convertible_to<std::size_t>;
      { models.sample_initial(k, rng) } -> std::convertible_to<typename M::state_type>;
      { models.log_initial_density(x, k) } -> std::convertible_to<double>;
      { models.sample_transition(x, k, rng) } -> std::convertible_to<typename M::state_type>;
      { models.log_transition_density(x, x, k) } -> std::convertible_to<double>;
      { models.sample_observation(x, k, rng) } -> std::convertible_to<typename M::observation_type>;
      { models.log_likelihood(y, x, k) } -> std::convertible_to<double>;
      { x * 1.0 } -> std::convertible_to<typename M::state_type>;
      { x + x } -> std::convertible_to<typename M::state_type>;
    };

/// Throws `ConfigError` unless `k` indexes one of `count` models.
inline void check_model_index(ModelIndex k, std::size_t count) {
  if (k.value >= count) {
    throw ConfigError("model index " + std::to_string(k.one_based()) + " outside 1.." +
                      std::to_string(count));
  }
}

}  // namespace rspf

#endif
