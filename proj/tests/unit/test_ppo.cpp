// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "finrag/error.hpp"
#include "finrag/ppo.hpp"
#include "gradcheck.hpp"

using namespace finrag;

namespace {

Transition step(double reward, double value, bool terminal = false) {
  Transition t;
  t.reward = reward;
  t.value_estimate = value;
  t.terminal = terminal;
  return t;
}

}  // namespace

TEST_CASE("clipped objective values") {
  CHECK(ppo_objective(1.0, 1.0, 0.2) == 1.0);
  CHECK(ppo_objective(1.5, 1.0, 0.2) == 1.2);
  CHECK(ppo_objective(0.5, -1.0, 0.2) == -0.8);
}

TEST_CASE("clipping never increases the surrogate and ignores epsilon inside the band") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ratio(0.0, 3.0);
  std::uniform_real_distribution<double> adv(-5.0, 5.0);
  std::uniform_real_distribution<double> eps(0.01, 0.99);
  for (int i = 0; i < 20000; ++i) {
    const double r = ratio(rng), a = adv(rng), e = eps(rng);
    CHECK(ppo_objective(r, a, e) <= r * a);
    if (std::abs(r - 1.0) <= e) CHECK(ppo_objective(r, a, e) == r * a);
  }
}

TEST_CASE("advantages") {
  const std::vector<Transition> one{step(1.0, 0.0)};
  CHECK(compute_advantages(one, 1.0).raw == std::vector<double>{1.0});
  const std::vector<Transition> two{step(1.0, 0.0), step(1.0, 0.0)};
  const auto a = compute_advantages(two, 1.0);
  CHECK(a.returns == std::vector<double>{2.0, 1.0});
  CHECK(a.normalized[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.normalized[1] == doctest::Approx(-1.0).epsilon(1e-6));
  const std::vector<Transition> exact{step(1.0, 2.0), step(1.0, 1.0)};
  const auto z = compute_advantages(exact, 1.0);
  CHECK(z.raw == std::vector<double>{0.0, 0.0});
  CHECK(z.normalized == std::vector<double>{0.0, 0.0});
  const std::vector<Transition> episodes{step(1.0, 0.0, true), step(1.0, 0.0, true)};
  CHECK(compute_advantages(episodes, 1.0).returns == std::vector<double>{1.0, 1.0});
  const std::vector<Transition> discounted{step(1.0, 0.0), step(1.0, 0.0)};
  CHECK(compute_advantages(discounted, 0.5).returns == std::vector<double>{1.5, 1.0});
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    auto pb = gradcheck::random_problem(rng, 5, 2, 8, 2, 6);
    const auto r = gradcheck::check(pb);
    CHECK(r.policy_rel_error < 1e-4);
    CHECK(r.value_rel_error < 1e-4);
  }
}

TEST_CASE("zero advantages leave the policy in place") {
  std::mt19937_64 rng(3);
  auto pb = gradcheck::random_problem(rng, 4, 3, 8, 2, 16);
  std::fill(pb.advantages.begin(), pb.advantages.end(), 0.0);
  const auto lg = ppo_loss(pb.net, pb.batch, pb.advantages, pb.returns, 0.2);
  for (double g : lg.policy_grad) CHECK(g == 0.0);
  PPOConfig config;
  config.value_lr = 0.0;
  const std::vector<double> before(pb.net.parameters().begin(), pb.net.parameters().end());
  ParameterOptimizer opt(OptimizerKind::kSgd, pb.net.parameter_count());
  ppo_update(pb.net, opt, pb.batch, pb.advantages, pb.returns, config);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(std::abs(pb.net.parameters()[i] - before[i]) < 1e-8);
}

TEST_CASE("zero learning rate keeps parameters bit-identical") {
  std::mt19937_64 rng(4);
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kMomentum, OptimizerKind::kAdam}) {
    auto pb = gradcheck::random_problem(rng, 4, 3, 8, 2, 16);
    PPOConfig config;
    config.policy_lr = 0.0;
    config.value_lr = 0.0;
    config.optimizer = kind;
    const std::vector<double> before(pb.net.parameters().begin(), pb.net.parameters().end());
    ParameterOptimizer opt(kind, pb.net.parameter_count());
    const auto diag = ppo_update(pb.net, opt, pb.batch, config);
    CHECK(std::equal(before.begin(), before.end(), pb.net.parameters().begin()));
    CHECK(std::isfinite(diag.policy_loss));
  }
}

TEST_CASE("an update lowers the loss") {
  std::mt19937_64 rng(5);
  auto pb = gradcheck::random_problem(rng, 4, 3, 16, 2, 64);
  PPOConfig config;
  config.policy_lr = 1e-2;
  config.value_lr = 1e-2;
  const auto before = ppo_loss(pb.net, pb.batch, pb.advantages, pb.returns, 0.2);
  ParameterOptimizer opt(OptimizerKind::kSgd, pb.net.parameter_count());
  ppo_update(pb.net, opt, pb.batch, pb.advantages, pb.returns, config);
  const auto after = ppo_loss(pb.net, pb.batch, pb.advantages, pb.returns, 0.2);
  CHECK(after.policy_loss < before.policy_loss);
  CHECK(after.value_loss < before.value_loss);
}

TEST_CASE("non-finite gradients are reported") {
  std::mt19937_64 rng(6);
  auto pb = gradcheck::random_problem(rng, 4, 2, 4, 1, 4);
  pb.returns[0] = std::numeric_limits<double>::infinity();
  PPOConfig config;
  ParameterOptimizer opt(OptimizerKind::kSgd, pb.net.parameter_count());
  try {
    ppo_update(pb.net, opt, pb.batch, pb.advantages, pb.returns, config);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFiniteGradient);
  }
}

TEST_CASE("config validation") {
  PPOConfig c;
  CHECK_NOTHROW(c.validate());
  c.clip_epsilon = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PPOConfig{};
  c.discount_gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PPOConfig{};
  c.update_epochs = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("refinement loop bookkeeping") {
  SyntheticSourceEnvironment env({0.9, 0.5, 0.1});
  PPOConfig config;
  config.iterations = 0;
  const SourceWeights start({0.2, 0.3, 0.5});
  const auto none = run_rl_refinement(env, start, config, 1);
  CHECK(none.weights == start);
  CHECK(none.curve.empty());
  CHECK_FALSE(none.network);

  config.iterations = 7;
  config.rollout_length = 16;
  config.trunk_width = 8;
  const auto r = run_rl_refinement(env, start, config, 1);
  CHECK(r.curve.size() == 7);
  CHECK(r.network.has_value());
  const auto again = run_rl_refinement(env, start, config, 1);
  CHECK(again.weights == r.weights);
  CHECK(training_curve_csv(r.curve) == training_curve_csv(again.curve));
  CHECK(training_curve_csv(r.curve).rfind("iteration,mean_reward,policy_loss,value_loss,clip_fraction\n", 0) == 0);

  config.iterations = 50;
  config.plateau_patience = 2;
  config.plateau_tolerance = 10.0;  // nothing counts as improvement after the first round
  CHECK(run_rl_refinement(env, start, config, 1).curve.size() == 3);
}

TEST_CASE("synthetic environment") {
  SyntheticSourceEnvironment env({1.0, 0.0});
  std::mt19937_64 rng(7);
  CHECK(env.step(SourceWeights({1.0, 0.0}), rng).reward == 1.0);
  CHECK(env.step(SourceWeights({0.0, 1.0}), rng).reward == -1.0);
  CHECK(env.expected_reward(SourceWeights({0.5, 0.5})) == 0.0);
  CHECK(env.observe().size() == 4);
}

TEST_CASE("PPO favours the reliable source") {
  // small-budget version of the bandit check, with a faster optimizer
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticSourceEnvironment env({0.9, 0.5, 0.1});
    PPOConfig config;
    config.iterations = 40;
    config.rollout_length = 64;
    config.trunk_width = 16;
    config.optimizer = OptimizerKind::kAdam;
    config.policy_lr = 1e-2;
    const auto r = run_rl_refinement(env, SourceWeights::uniform(3), config, seed);
    wins += (r.weights[0] > r.weights[1] && r.weights[0] > r.weights[2]) ? 1 : 0;
  }
  CHECK(wins >= 4);
}
