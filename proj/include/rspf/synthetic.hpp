#ifndef RSPF_SYNTHETIC_HPP
#define RSPF_SYNTHETIC_HPP

#include <cmath>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include <rspf/random.hpp>
#include <rspf/ssm.hpp>

/**
 * \file
 * \brief The scalar benchmark family
 *   x_t = a_k x_{t-1} + c_k + u_t,   y_t = b_k sqrt(|x_t|) + d_k + v_t,
 * with Gaussian noise and a uniform initial state.
 */

namespace rspf {

/// Coefficients of the benchmark family, one entry per model.
struct SyntheticModelParams {
  std::vector<double> a{-0.1, -0.3, -0.5, -0.9, 0.1, 0.3, 0.5, 0.9};
  std::vector<double> b{-0.1, -0.3, -0.5, -0.9, 0.1, 0.3, 0.5, 0.9};
  std::vector<double> c{0.0, -2.0, 2.0, -4.0, 0.0, 2.0, -2.0, 4.0};
  std::vector<double> d{0.0, -2.0, 2.0, -4.0, 0.0, 2.0, -2.0, 4.0};
  double process_variance = 0.1;
  double observation_variance = 0.1;
  double x0_low = -0.5;
  double x0_high = 0.5;

  std::size_t size() const { return a.size(); }

  /// Throws `ConfigError` if any invariant is violated.
  void validate() const {
    if (a.empty()) {
      throw ConfigError("synthetic model set needs at least one model");
    }
    if (b.size() != a.size() || c.size() != a.size() || d.size() != a.size()) {
      throw ConfigError("coefficient arrays a, b, c, d must have equal length");
    }
    if (!(process_variance > 0.0) || !(observation_variance > 0.0)) {
      throw ConfigError("noise variances must be positive");
    }
    if (!(x0_low < x0_high)) {
      throw ConfigError("x0_low must be below x0_high");
    }
  }
};

inline void to_json(nlohmann::json& j, const SyntheticModelParams& p) {
  j = nlohmann::json{{"a", p.a},
                     {"b", p.b},
                     {"c", p.c},
                     {"d", p.d},
                     {"process_variance", p.process_variance},
                     {"observation_variance", p.observation_variance},
                     {"x0_low", p.x0_low},
                     {"x0_high", p.x0_high}};
}

/// Missing fields keep their defaults.
inline void from_json(const nlohmann::json& j, SyntheticModelParams& p) {
  const SyntheticModelParams defaults{};
  p.a = j.value("a", defaults.a);
  p.b = j.value("b", defaults.b);
  p.c = j.value("c", defaults.c);
  p.d = j.value("d", defaults.d);
  p.process_variance = j.value("process_variance", defaults.process_variance);
  p.observation_variance = j.value("observation_variance", defaults.observation_variance);
  p.x0_low = j.value("x0_low", defaults.x0_low);
  p.x0_high = j.value("x0_high", defaults.x0_high);
  p.validate();
}

/// Draws x_t given x_{t-1} under model k. `noise` supplies standard normal draws.
template <class Noise>
double synthetic_state_step(double x_prev, ModelIndex k, const SyntheticModelParams& params, Noise& noise) {
  check_model_index(k, params.size());
  return params.a[k.value] * x_prev + params.c[k.value] + std::sqrt(params.process_variance) * noise.normal();
}

/// Noise-free observation mean b_k sqrt(|x|) + d_k.
inline double synthetic_observation_mean(double x, ModelIndex k, const SyntheticModelParams& params) {
  return params.b[k.value] * std::sqrt(std::abs(x)) + params.d[k.value];
}

/// Draws y_t given x_t under model k.
template <class Noise>
double synthetic_observe(double x, ModelIndex k, const SyntheticModelParams& params, Noise& noise) {
  check_model_index(k, params.size());
  return synthetic_observation_mean(x, k, params) + std::sqrt(params.observation_variance) * noise.normal();
}

/// log p(y_t | x_t, M_t = k).
inline double synthetic_obs_log_likelihood(double y, double x, ModelIndex k, const SyntheticModelParams& params) {
  check_model_index(k, params.size());
  return gaussian_log_pdf(y, synthetic_observation_mean(x, k, params), params.observation_variance);
}

/// `CandidateModelSet` over the benchmark family.
class SyntheticModelSet {
 public:
  using state_type = double;
  using observation_type = double;

  explicit SyntheticModelSet(SyntheticModelParams params) : params_{std::move(params)} {
    params_.validate();
    sd_u_ = std::sqrt(params_.process_variance);
  }

  std::size_t size() const { return params_.size(); }
  const SyntheticModelParams& params() const { return params_; }

  // The initial prior is the same uniform for every model.
  double sample_initial(ModelIndex, RandomSource& rng) const { return rng.uniform(params_.x0_low, params_.x0_high); }

  double log_initial_density(double x, ModelIndex) const {
    if (x < params_.x0_low || x > params_.x0_high) {
      return -std::numeric_limits<double>::infinity();
    }
    return -std::log(params_.x0_high - params_.x0_low);
  }

  double sample_transition(double x_prev, ModelIndex k, RandomSource& rng) const {
    return params_.a[k.value] * x_prev + params_.c[k.value] + sd_u_ * rng.normal();
  }

  double log_transition_density(double x, double x_prev, ModelIndex k) const {
    return gaussian_log_pdf(x, params_.a[k.value] * x_prev + params_.c[k.value], params_.process_variance);
  }

  double sample_observation(double x, ModelIndex k, RandomSource& rng) const {
    return synthetic_observe(x, k, params_, rng);
  }

  double log_likelihood(double y, double x, ModelIndex k) const {
    return gaussian_log_pdf(y, synthetic_observation_mean(x, k, params_), params_.observation_variance);
  }

 private:
  SyntheticModelParams params_;
  double sd_u_;
};

static_assert(CandidateModelSet<SyntheticModelSet>);

/// The eight-model benchmark family with its published coefficients.
inline SyntheticModelSet make_benchmark_model_set() { return SyntheticModelSet{SyntheticModelParams{}}; }

}  // namespace rspf

#endif
