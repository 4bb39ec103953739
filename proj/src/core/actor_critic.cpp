// SPDX-License-Identifier: Apache-2.0
#include "finrag/actor_critic.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "finrag/error.hpp"

namespace finrag {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void ActorCritic::build_layout() {
  if (shape_.input_dim == 0 || shape_.action_dim == 0 || shape_.trunk_width == 0 ||
      shape_.trunk_depth == 0) {
    throw Error(ErrorCode::kInvalidArgument, "network dimensions must be positive");
  }
  std::size_t offset = 0;
  const auto add = [&offset](std::size_t in, std::size_t out) {
    Layer l{offset, offset + in * out, in, out};
    offset += in * out + out;
    return l;
  };
  trunk_.clear();
  std::size_t in = shape_.input_dim;
  for (std::size_t d = 0; d < shape_.trunk_depth; ++d) {
    trunk_.push_back(add(in, shape_.trunk_width));
    in = shape_.trunk_width;
  }
  policy_head_ = add(in, shape_.action_dim);
  log_std_offset_ = offset;
  offset += shape_.action_dim;
  value_head_ = add(in, 1);
  params_.resize(offset, 0.0);
}

ActorCritic::ActorCritic(const NetworkShape& shape, std::span<const double> initial_mean,
                         double init_log_std, std::mt19937_64& rng)
    : shape_(shape) {
  build_layout();
  if (initial_mean.size() != shape_.action_dim) {
    throw Error(ErrorCode::kInvalidArgument, "initial mean length must equal action_dim");
  }
  const auto fill_uniform = [&](const Layer& l, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t i = 0; i < l.in * l.out; ++i) params_[l.weight + i] = u(rng);
  };
  for (const auto& l : trunk_) {
    fill_uniform(l, std::sqrt(6.0 / static_cast<double>(l.in + l.out)));  // Glorot
  }
  fill_uniform(policy_head_, 0.01);
  fill_uniform(value_head_, 0.01);
  for (std::size_t k = 0; k < shape_.action_dim; ++k) {
    params_[policy_head_.bias + k] = initial_mean[k];
    params_[log_std_offset_ + k] = init_log_std;
  }
}

ActorCritic::ActorCritic(const NetworkShape& shape, std::vector<double> parameters) : shape_(shape) {
  build_layout();
  if (parameters.size() != params_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(params_.size()) + " parameters, got " +
                    std::to_string(parameters.size()));
  }
  params_ = std::move(parameters);
}

ActorCritic::Pass ActorCritic::forward(const VectorXd& state) const {
  if (static_cast<std::size_t>(state.size()) != shape_.input_dim) {
    throw Error(ErrorCode::kInvalidArgument, "state dimension mismatch");
  }
  const auto affine = [this](const Layer& l, const VectorXd& x) -> VectorXd {
    Map<const MatrixXd> w(params_.data() + l.weight, static_cast<Eigen::Index>(l.out),
                          static_cast<Eigen::Index>(l.in));
    Map<const VectorXd> b(params_.data() + l.bias, static_cast<Eigen::Index>(l.out));
    return w * x + b;
  };
  Pass pass;
  pass.activations.reserve(trunk_.size() + 1);
  pass.activations.push_back(state);
  for (const auto& l : trunk_) {
    pass.activations.push_back(affine(l, pass.activations.back()).array().tanh().matrix());
  }
  pass.mean = affine(policy_head_, pass.activations.back());
  pass.value = affine(value_head_, pass.activations.back())[0];
  return pass;
}

VectorXd ActorCritic::log_std() const {
  return Map<const VectorXd>(params_.data() + log_std_offset_,
                             static_cast<Eigen::Index>(shape_.action_dim));
}

void ActorCritic::backward(const Pass& pass, const VectorXd& d_mean, double d_value,
                           const VectorXd& d_log_std, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw Error(ErrorCode::kInvalidArgument, "gradient size mismatch");
  const auto weights = [this](const Layer& l) {
    return Map<const MatrixXd>(params_.data() + l.weight, static_cast<Eigen::Index>(l.out),
                               static_cast<Eigen::Index>(l.in));
  };
  const auto grad_w = [&grad](const Layer& l) {
    return Map<MatrixXd>(grad.data() + l.weight, static_cast<Eigen::Index>(l.out),
                         static_cast<Eigen::Index>(l.in));
  };
  const auto grad_b = [&grad](const Layer& l) {
    return Map<VectorXd>(grad.data() + l.bias, static_cast<Eigen::Index>(l.out));
  };

  const VectorXd& top = pass.activations.back();
  grad_w(policy_head_).noalias() += d_mean * top.transpose();
  grad_b(policy_head_) += d_mean;
  grad_w(value_head_).row(0) += d_value * top.transpose();
  grad_b(value_head_)[0] += d_value;
  Map<VectorXd>(grad.data() + log_std_offset_, static_cast<Eigen::Index>(shape_.action_dim)) += d_log_std;

  VectorXd g_h = weights(policy_head_).transpose() * d_mean;
  g_h += d_value * weights(value_head_).row(0).transpose();
  for (std::size_t d = trunk_.size(); d-- > 0;) {
    const auto& l = trunk_[d];
    const VectorXd& out = pass.activations[d + 1];
    const VectorXd g_z = g_h.array() * (1.0 - out.array().square());
    grad_w(l).noalias() += g_z * pass.activations[d].transpose();
    grad_b(l) += g_z;
    if (d > 0) g_h = weights(l).transpose() * g_z;
  }
}

std::string ActorCritic::to_json() const {
  nlohmann::ordered_json out;
  out["layout"] = {{"trunk_depth", shape_.trunk_depth},
                   {"trunk_width", shape_.trunk_width},
                   {"K", shape_.action_dim},
                   {"input_dim", shape_.input_dim}};
  out["parameters"] = params_;
  return out.dump() + "\n";
}

ActorCritic ActorCritic::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& layout = j.at("layout");
    NetworkShape shape;
    shape.trunk_depth = layout.at("trunk_depth").get<std::size_t>();
    shape.trunk_width = layout.at("trunk_width").get<std::size_t>();
    shape.action_dim = layout.at("K").get<std::size_t>();
    shape.input_dim = layout.at("input_dim").get<std::size_t>();
    return ActorCritic(shape, j.at("parameters").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadRecord, std::string("checkpoint: ") + e.what());
  }
}

double gaussian_log_prob(const VectorXd& x, const VectorXd& mean, const VectorXd& log_std) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - half_log_2pi;
  }
  return lp;
}

std::vector<double> normalize_action(std::span<const double> raw) {
  std::vector<double> out(raw.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    // NaN clamps to 0
    out[i] = raw[i] > 0.0 ? std::min(raw[i], 1.0) : 0.0;
    sum += out[i];
  }
  if (!(sum > 0.0)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(raw.size()));
    return out;
  }
  for (auto& w : out) w /= sum;
  return out;
}

namespace {

void require_finite(const ActorCritic::Pass& pass) {
  if (!pass.mean.allFinite() || !std::isfinite(pass.value)) {
    throw Error(ErrorCode::kNonFiniteOutput, "policy/value forward pass produced a non-finite value");
  }
}

}  // namespace

PolicySample policy_sample(const ActorCritic& net, const VectorXd& state, std::mt19937_64& rng) {
  if (!state.allFinite()) throw Error(ErrorCode::kNonFiniteOutput, "state contains non-finite entries");
  const auto pass = net.forward(state);
  require_finite(pass);
  const VectorXd log_std = net.log_std();
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd raw(pass.mean.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    raw[i] = pass.mean[i] + std::exp(log_std[i]) * normal(rng);
  }
  PolicySample sample;
  sample.raw.assign(raw.data(), raw.data() + raw.size());
  sample.action = normalize_action(sample.raw);
  sample.log_prob = gaussian_log_prob(raw, pass.mean, log_std);
  sample.value = pass.value;
  if (!std::isfinite(sample.log_prob)) {
    throw Error(ErrorCode::kNonFiniteOutput, "log-probability is not finite");
  }
  return sample;
}

std::vector<double> deterministic_action(const ActorCritic& net, const VectorXd& state) {
  const auto pass = net.forward(state);
  require_finite(pass);
  return normalize_action(std::span<const double>(pass.mean.data(), static_cast<std::size_t>(pass.mean.size())));
}

}  // namespace finrag
