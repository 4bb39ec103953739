// SPDX-License-Identifier: Apache-2.0
// Central finite differences of the PPO losses against the analytic gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "finrag/ppo.hpp"

namespace gradcheck {

struct Problem {
  finrag::ActorCritic net;
  std::vector<finrag::Transition> batch;
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Random network and batch; old log-probs sit within ±0.1 of the current ones so
// every ratio stays well inside the clip range and the surrogate is smooth.
inline Problem random_problem(std::mt19937_64& rng, std::size_t input_dim, std::size_t k, std::size_t width,
                              std::size_t depth, std::size_t batch_size) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<double> init(k);
  for (auto& m : init) m = 1.0 / static_cast<double>(k) + 0.1 * normal(rng);
  finrag::ActorCritic net({input_dim, width, depth, k}, init, -1.0 + 0.3 * normal(rng), rng);
  // spread the head weights so the policy mean depends on the state
  for (auto& p : net.parameters()) p += 0.1 * normal(rng);
  Problem pb{net, {}, {}, {}};
  for (std::size_t t = 0; t < batch_size; ++t) {
    finrag::Transition tr;
    tr.state = Eigen::VectorXd(static_cast<Eigen::Index>(input_dim));
    for (Eigen::Index i = 0; i < tr.state.size(); ++i) tr.state[i] = normal(rng);
    const auto pass = pb.net.forward(tr.state);
    const Eigen::VectorXd ls = pb.net.log_std();
    tr.raw_action.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      tr.raw_action[j] = pass.mean[static_cast<Eigen::Index>(j)] + std::exp(ls[static_cast<Eigen::Index>(j)]) * normal(rng);
    }
    const Eigen::VectorXd raw = Eigen::Map<const Eigen::VectorXd>(tr.raw_action.data(), static_cast<Eigen::Index>(k));
    tr.log_prob = finrag::gaussian_log_prob(raw, pass.mean, ls) + jitter(rng);
    pb.batch.push_back(tr);
    pb.advantages.push_back(normal(rng));
    pb.returns.push_back(normal(rng));
  }
  return pb;
}

struct Result {
  double policy_rel_error = 0.0;
  double value_rel_error = 0.0;
};

// ||analytic - numeric|| / max(||analytic||, ||numeric||)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

inline Result check(Problem& pb, double clip_epsilon = 0.2, double h = 1e-6) {
  const auto analytic = finrag::ppo_loss(pb.net, pb.batch, pb.advantages, pb.returns, clip_epsilon);
  std::vector<double> num_policy(pb.net.parameter_count());
  std::vector<double> num_value(pb.net.parameter_count());
  auto params = pb.net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const auto up = finrag::ppo_loss(pb.net, pb.batch, pb.advantages, pb.returns, clip_epsilon);
    params[i] = saved - h;
    const auto down = finrag::ppo_loss(pb.net, pb.batch, pb.advantages, pb.returns, clip_epsilon);
    params[i] = saved;
    num_policy[i] = (up.policy_loss - down.policy_loss) / (2 * h);
    num_value[i] = (up.value_loss - down.value_loss) / (2 * h);
  }
  return {relative_error(analytic.policy_grad, num_policy), relative_error(analytic.value_grad, num_value)};
}

}  // namespace gradcheck
