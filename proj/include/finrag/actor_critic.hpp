// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace finrag {

struct NetworkShape {
  std::size_t input_dim = 0;
  std::size_t trunk_width = 64;
  std::size_t trunk_depth = 2;
  std::size_t action_dim = 0;  // K

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// Shared tanh trunk with two linear heads: the policy mean over K raw weights
// (plus a free log-std vector) and a scalar state value. All parameters live in
// one flat vector so checkpoints and finite-difference checks address them
// uniformly.
class ActorCritic {
 public:
  struct Pass {
    std::vector<Eigen::VectorXd> activations;  // input, then each trunk layer output
    Eigen::VectorXd mean;
    double value = 0.0;
  };

  // Trunk and head weights are drawn from `rng`; the policy-head bias starts at
  // `initial_mean`, so the untrained policy is centred on the initial weights.
  ActorCritic(const NetworkShape& shape, std::span<const double> initial_mean, double init_log_std,
              std::mt19937_64& rng);
  ActorCritic(const NetworkShape& shape, std::vector<double> parameters);

  const NetworkShape& shape() const { return shape_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  Pass forward(const Eigen::VectorXd& state) const;
  Eigen::VectorXd log_std() const;

  // Accumulates dL/dθ into `grad` given the loss derivatives at the outputs.
  void backward(const Pass& pass, const Eigen::VectorXd& d_mean, double d_value,
                const Eigen::VectorXd& d_log_std, std::span<double> grad) const;

  // {"layout": {...}, "parameters": [...]}; doubles round-trip exactly.
  std::string to_json() const;
  static ActorCritic from_json(std::string_view text);

 private:
  struct Layer {
    std::size_t weight = 0;  // offset of a (out x in) column-major matrix
    std::size_t bias = 0;
    std::size_t in = 0;
    std::size_t out = 0;
  };

  void build_layout();

  NetworkShape shape_;
  std::vector<double> params_;
  std::vector<Layer> trunk_;
  Layer policy_head_;
  Layer value_head_;
  std::size_t log_std_offset_ = 0;
};

double gaussian_log_prob(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std);

// Clamp every entry to [0, 1] and divide by the sum; uniform when the sum is 0.
std::vector<double> normalize_action(std::span<const double> raw);

struct PolicySample {
  std::vector<double> raw;     // Gaussian draw
  std::vector<double> action;  // normalize_action(raw)
  double log_prob = 0.0;       // density of `raw`
  double value = 0.0;
};

// Throws Error(kNonFiniteOutput) when the forward pass is not finite.
PolicySample policy_sample(const ActorCritic& net, const Eigen::VectorXd& state, std::mt19937_64& rng);
std::vector<double> deterministic_action(const ActorCritic& net, const Eigen::VectorXd& state);

}  // namespace finrag
