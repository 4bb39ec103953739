// SPDX-License-Identifier: Apache-2.0
#include "finrag/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "finrag/error.hpp"

namespace finrag {

using Eigen::VectorXd;

void PPOConfig::validate() const {
  const auto fail = [](const char* what) { throw Error(ErrorCode::kConfig, what); };
  if (!(policy_lr >= 0.0) || !(value_lr >= 0.0)) fail("learning rates must be non-negative");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) fail("clip_epsilon must lie in (0, 1)");
  if (!(discount_gamma > 0.0 && discount_gamma <= 1.0)) fail("discount_gamma must lie in (0, 1]");
  if (update_epochs == 0) fail("update_epochs must be positive");
  if (rollout_length == 0) fail("rollout_length must be positive");
  if (trunk_width == 0 || trunk_depth == 0) fail("trunk_width and trunk_depth must be positive");
  if (!std::isfinite(init_log_std)) fail("init_log_std must be finite");
}

Advantages compute_advantages(std::span<const Transition> transitions, double gamma, double epsilon) {
  const std::size_t n = transitions.size();
  Advantages out;
  out.returns.resize(n);
  out.raw.resize(n);
  out.normalized.resize(n);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    if (transitions[t].terminal) running = 0.0;
    running = transitions[t].reward + gamma * running;
    out.returns[t] = running;
    out.raw[t] = running - transitions[t].value_estimate;
  }
  if (n == 0) return out;
  const double mean = std::accumulate(out.raw.begin(), out.raw.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (const double a : out.raw) var += (a - mean) * (a - mean);
  const double std_dev = std::sqrt(var / static_cast<double>(n));
  for (std::size_t t = 0; t < n; ++t) out.normalized[t] = (out.raw[t] - mean) / (std_dev + epsilon);
  return out;
}

double ppo_objective(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

LossAndGradient ppo_loss(const ActorCritic& net, std::span<const Transition> batch,
                         std::span<const double> advantages, std::span<const double> returns,
                         double clip_epsilon) {
  const std::size_t n = batch.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty rollout");
  if (advantages.size() != n || returns.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "advantage/return length mismatch");
  }
  const std::size_t k = net.shape().action_dim;
  LossAndGradient out;
  out.policy_grad.assign(net.parameter_count(), 0.0);
  out.value_grad.assign(net.parameter_count(), 0.0);

  const VectorXd log_std = net.log_std();
  const VectorXd inv_var = (-2.0 * log_std).array().exp();
  const double inv_n = 1.0 / static_cast<double>(n);
  const VectorXd zero_k = VectorXd::Zero(static_cast<Eigen::Index>(k));
  std::size_t clipped = 0;

  for (std::size_t t = 0; t < n; ++t) {
    const auto& tr = batch[t];
    const auto pass = net.forward(tr.state);
    const VectorXd raw = Eigen::Map<const VectorXd>(tr.raw_action.data(), static_cast<Eigen::Index>(k));
    const double log_prob = gaussian_log_prob(raw, pass.mean, log_std);
    const double ratio = std::exp(log_prob - tr.log_prob);
    const double a = advantages[t];

    const double surrogate = ppo_objective(ratio, a, clip_epsilon);
    out.policy_loss -= surrogate * inv_n;
    out.mean_ratio += ratio * inv_n;
    if (std::abs(ratio - 1.0) > clip_epsilon) ++clipped;

    // The unclipped branch carries the gradient; the clipped one is constant.
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    const double d_logp = (ratio * a <= clipped_ratio * a) ? -a * ratio * inv_n : 0.0;
    if (d_logp != 0.0) {
      const VectorXd diff = raw - pass.mean;
      const VectorXd d_mean = d_logp * (diff.array() * inv_var.array()).matrix();
      const VectorXd d_log_std = d_logp * ((diff.array().square() * inv_var.array()) - 1.0).matrix();
      net.backward(pass, d_mean, 0.0, d_log_std, out.policy_grad);
    }

    const double err = pass.value - returns[t];
    out.value_loss += err * err * inv_n;
    net.backward(pass, zero_k, 2.0 * err * inv_n, zero_k, out.value_grad);
  }
  out.clip_fraction = static_cast<double>(clipped) * inv_n;
  return out;
}

ParameterOptimizer::ParameterOptimizer(OptimizerKind kind, std::size_t parameter_count, double momentum)
    : kind_(kind), momentum_(momentum), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void ParameterOptimizer::step(std::span<double> params, std::span<const double> policy_grad,
                              double policy_lr, std::span<const double> value_grad, double value_lr) {
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double delta = 0.0;
    switch (kind_) {
      case OptimizerKind::kSgd:
        delta = policy_lr * policy_grad[i] + value_lr * value_grad[i];
        break;
      case OptimizerKind::kMomentum:
        m_[i] = momentum_ * m_[i] + policy_lr * policy_grad[i] + value_lr * value_grad[i];
        delta = m_[i];
        break;
      case OptimizerKind::kAdam: {
        // one moment estimate over the combined gradient, scaled by policy_lr
        const double scale = policy_lr > 0.0 ? value_lr / policy_lr : 0.0;
        const double g = policy_grad[i] + scale * value_grad[i];
        m_[i] = 0.9 * m_[i] + 0.1 * g;
        v_[i] = 0.999 * v_[i] + 0.001 * g * g;
        const double m_hat = m_[i] / (1.0 - std::pow(0.9, static_cast<double>(t_)));
        const double v_hat = v_[i] / (1.0 - std::pow(0.999, static_cast<double>(t_)));
        delta = policy_lr * m_hat / (std::sqrt(v_hat) + 1e-8);
        break;
      }
    }
    if (delta != 0.0) params[i] -= delta;
  }
}

UpdateDiagnostics ppo_update(ActorCritic& net, ParameterOptimizer& optimizer,
                             std::span<const Transition> batch, std::span<const double> advantages,
                             std::span<const double> returns, const PPOConfig& config) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "ppo_update needs a nonempty rollout");
  UpdateDiagnostics diag;
  for (std::size_t epoch = 0; epoch < config.update_epochs; ++epoch) {
    const auto lg = ppo_loss(net, batch, advantages, returns, config.clip_epsilon);
    const auto finite = [](const std::vector<double>& g) {
      return std::all_of(g.begin(), g.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(lg.policy_grad) || !finite(lg.value_grad)) {
      throw Error(ErrorCode::kNonFiniteGradient, "non-finite gradient in PPO epoch " + std::to_string(epoch));
    }
    optimizer.step(net.parameters(), lg.policy_grad, config.policy_lr, lg.value_grad, config.value_lr);
    diag = {lg.mean_ratio, lg.clip_fraction, lg.policy_loss, lg.value_loss};
  }
  return diag;
}

UpdateDiagnostics ppo_update(ActorCritic& net, ParameterOptimizer& optimizer,
                             std::span<const Transition> batch, const PPOConfig& config) {
  const auto adv = compute_advantages(batch, config.discount_gamma, config.advantage_epsilon);
  return ppo_update(net, optimizer, batch, adv.normalized, adv.returns, config);
}

SyntheticSourceEnvironment::SyntheticSourceEnvironment(std::vector<double> reliabilities,
                                                       std::size_t state_dim)
    : reliabilities_(std::move(reliabilities)), state_dim_(state_dim) {
  if (reliabilities_.empty() || state_dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic environment needs sources and a state");
  }
  for (const double p : reliabilities_) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "reliability outside [0, 1]");
  }
}

VectorXd SyntheticSourceEnvironment::observe() { return VectorXd::Ones(static_cast<Eigen::Index>(state_dim_)); }

StepResult SyntheticSourceEnvironment::step(const SourceWeights& action, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> pick(action.values().begin(), action.values().end());
  const auto source = pick(rng);
  std::bernoulli_distribution correct(reliabilities_[source]);
  return {correct(rng) ? 1.0 : -1.0, true};
}

double SyntheticSourceEnvironment::expected_reward(const SourceWeights& action) const {
  double r = 0.0;
  for (std::size_t j = 0; j < reliabilities_.size(); ++j) r += action[j] * (2.0 * reliabilities_[j] - 1.0);
  return r;
}

RLRefinementResult run_rl_refinement(Environment& env, const SourceWeights& initial,
                                     const PPOConfig& config, std::uint64_t seed) {
  config.validate();
  if (env.source_count() != initial.size()) {
    throw Error(ErrorCode::kInvalidArgument, "environment and weights disagree on K");
  }
  RLRefinementResult result{initial, {}, std::nullopt};
  if (config.iterations == 0) return result;

  std::mt19937_64 rng(seed);
  const NetworkShape shape{env.state_dim(), config.trunk_width, config.trunk_depth, initial.size()};
  ActorCritic net(shape, initial.values(), config.init_log_std, rng);
  ParameterOptimizer optimizer(config.optimizer, net.parameter_count(), config.momentum);

  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<Transition> rollout;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    rollout.clear();
    double reward_sum = 0.0;
    for (std::size_t s = 0; s < config.rollout_length; ++s) {
      Transition tr;
      tr.state = env.observe();
      auto sample = policy_sample(net, tr.state, rng);
      const auto outcome = env.step(SourceWeights(sample.action), rng);
      tr.raw_action = std::move(sample.raw);
      tr.action = std::move(sample.action);
      tr.log_prob = sample.log_prob;
      tr.value_estimate = sample.value;
      tr.reward = outcome.reward;
      tr.terminal = outcome.terminal;
      reward_sum += outcome.reward;
      rollout.push_back(std::move(tr));
    }
    const auto diag = ppo_update(net, optimizer, rollout, config);
    const double mean_reward = reward_sum / static_cast<double>(rollout.size());
    result.curve.push_back({it, mean_reward, diag.policy_loss, diag.value_loss, diag.clip_fraction});

    if (config.plateau_patience > 0) {
      if (mean_reward > best + config.plateau_tolerance) {
        best = mean_reward;
        since_best = 0;
      } else if (++since_best >= config.plateau_patience) {
        break;
      }
    }
  }
  result.weights = SourceWeights(deterministic_action(net, env.observe()));
  result.network = std::move(net);
  return result;
}

std::string training_curve_csv(std::span<const TrainingPoint> curve) {
  std::string out = "iteration,mean_reward,policy_loss,value_loss,clip_fraction\n";
  char buf[160];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", p.iteration, p.mean_reward,
                  p.policy_loss, p.value_loss, p.clip_fraction);
    out += buf;
  }
  return out;
}

}  // namespace finrag
