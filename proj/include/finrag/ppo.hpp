// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "finrag/actor_critic.hpp"
#include "finrag/retrieval.hpp"

namespace finrag {

enum class OptimizerKind { kSgd, kMomentum, kAdam };

struct PPOConfig {
  double policy_lr = 5e-4;
  double value_lr = 5e-4;
  double clip_epsilon = 0.2;
  double discount_gamma = 1.0;
  std::size_t update_epochs = 10;
  std::size_t rollout_length = 128;
  std::size_t trunk_width = 64;
  std::size_t trunk_depth = 2;
  double init_log_std = -2.0;
  double advantage_epsilon = 1e-8;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double momentum = 0.9;
  std::size_t iterations = 50;
  // Stop early once the best mean reward has not improved by more than
  // `plateau_tolerance` for this many iterations; 0 disables.
  std::size_t plateau_patience = 0;
  double plateau_tolerance = 1e-3;

  void validate() const;
};

struct Transition {
  Eigen::VectorXd state;
  std::vector<double> raw_action;  // Gaussian draw the log-prob refers to
  std::vector<double> action;      // executed weights (on the simplex)
  double log_prob = 0.0;
  double reward = 0.0;
  double value_estimate = 0.0;
  bool terminal = false;  // episode ends after this step
};

struct Advantages {
  std::vector<double> returns;     // discounted return-to-go
  std::vector<double> raw;         // returns - value_estimate
  std::vector<double> normalized;  // zero mean, unit variance
};

Advantages compute_advantages(std::span<const Transition> transitions, double gamma,
                              double epsilon = 1e-8);

// min(r·A, clip(r, 1-ε, 1+ε)·A)
double ppo_objective(double ratio, double advantage, double epsilon);

struct LossAndGradient {
  double policy_loss = 0.0;  // -mean clipped surrogate
  double value_loss = 0.0;   // mean squared error to returns
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  std::vector<double> policy_grad;
  std::vector<double> value_grad;
};

LossAndGradient ppo_loss(const ActorCritic& net, std::span<const Transition> batch,
                         std::span<const double> advantages, std::span<const double> returns,
                         double clip_epsilon);

struct UpdateDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
};

// Applies gradient steps to the flat parameter vector; keeps momentum/Adam state.
class ParameterOptimizer {
 public:
  ParameterOptimizer(OptimizerKind kind, std::size_t parameter_count, double momentum = 0.9);
  void step(std::span<double> params, std::span<const double> policy_grad, double policy_lr,
            std::span<const double> value_grad, double value_lr);

 private:
  OptimizerKind kind_;
  double momentum_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// update_epochs full-batch steps: ascend the clipped surrogate at policy_lr and
// descend the value error at value_lr. Throws Error(kNonFiniteGradient).
UpdateDiagnostics ppo_update(ActorCritic& net, ParameterOptimizer& optimizer,
                             std::span<const Transition> batch, std::span<const double> advantages,
                             std::span<const double> returns, const PPOConfig& config);
UpdateDiagnostics ppo_update(ActorCritic& net, ParameterOptimizer& optimizer,
                             std::span<const Transition> batch, const PPOConfig& config);

struct StepResult {
  double reward = 0.0;
  bool terminal = true;
};

// Market-feedback environment: the action is a weight vector over the sources.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t source_count() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual Eigen::VectorXd observe() = 0;
  virtual StepResult step(const SourceWeights& action, std::mt19937_64& rng) = 0;
};

// Stateless test-bed: each step draws one source in proportion to the action
// weights; the prediction it supports is correct with that source's reliability.
class SyntheticSourceEnvironment final : public Environment {
 public:
  explicit SyntheticSourceEnvironment(std::vector<double> reliabilities, std::size_t state_dim = 4);

  std::size_t source_count() const override { return reliabilities_.size(); }
  std::size_t state_dim() const override { return state_dim_; }
  Eigen::VectorXd observe() override;
  StepResult step(const SourceWeights& action, std::mt19937_64& rng) override;

  // Σ w_j (2 p_j - 1)
  double expected_reward(const SourceWeights& action) const;

 private:
  std::vector<double> reliabilities_;
  std::size_t state_dim_;
};

struct TrainingPoint {
  std::size_t iteration = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
};

struct RLRefinementResult {
  SourceWeights weights;
  std::vector<TrainingPoint> curve;
  std::optional<ActorCritic> network;  // empty when the budget is 0
};

// Alternates rollout collection and ppo_update for config.iterations rounds
// (or until the reward plateaus). Final weights are the normalized
// deterministic policy mean at the terminal state.
RLRefinementResult run_rl_refinement(Environment& env, const SourceWeights& initial,
                                     const PPOConfig& config, std::uint64_t seed);

// `iteration,mean_reward,policy_loss,value_loss,clip_fraction`
std::string training_curve_csv(std::span<const TrainingPoint> curve);

}  // namespace finrag
