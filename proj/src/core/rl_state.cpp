// SPDX-License-Identifier: Apache-2.0
#include "finrag/rl_state.hpp"

#include <algorithm>
#include <cmath>

#include "finrag/indicators.hpp"

namespace finrag {

std::vector<IndicatorFeature> default_indicators() {
  std::vector<IndicatorFeature> out;
  out.push_back({"macd", 26 + 9,
                 [](std::span<const double> opens) { return macd(opens); },
                 [](double raw, std::span<const double> opens) {
                   return opens.empty() ? 0.0 : raw / opens.back();
                 }});
  out.push_back({"rsi", 14 + 1,
                 [](std::span<const double> opens) { return rsi(opens); },
                 [](double raw, std::span<const double>) { return raw / 100.0; }});
  return out;
}

std::size_t state_dimension(std::size_t k, std::size_t return_window, std::size_t indicator_count) {
  return 2 * k + 1 + return_window + indicator_count;
}

std::size_t RLState::dimension() const {
  return current_weights.size() + 1 + avg_overlap_per_source.size() + recent_returns.size() +
         indicators.size();
}

Eigen::VectorXd RLState::features(std::span<const IndicatorFeature> registry,
                                  std::span<const double> opens) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dimension()));
  Eigen::Index i = 0;
  for (const double w : current_weights) x[i++] = w;
  x[i++] = historical_accuracy;
  for (const double o : avg_overlap_per_source) x[i++] = o;
  for (const double r : recent_returns) x[i++] = r;
  for (std::size_t j = 0; j < indicators.size(); ++j) {
    const bool valid = j < indicator_valid.size() && indicator_valid[j];
    x[i++] = (valid && j < registry.size()) ? registry[j].to_feature(indicators[j], opens) : 0.0;
  }
  return x;
}

RLState build_state(const SourceWeights& weights, const StateInputs& inputs,
                    const StateWindows& windows, std::span<const IndicatorFeature> registry) {
  const std::size_t k = weights.size();
  RLState state;
  state.current_weights = weights.values();

  const auto& fb = inputs.feedback_history;
  const auto n_fb = std::min(windows.accuracy_window, fb.size());
  if (n_fb > 0) {
    std::size_t correct = 0;
    for (const auto& r : fb.last(n_fb)) correct += r.correct ? 1 : 0;
    state.historical_accuracy = static_cast<double>(correct) / static_cast<double>(n_fb);
    state.accuracy_valid = true;
  }

  state.avg_overlap_per_source.assign(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  const auto& log = inputs.retrieval_log;
  for (const auto& entry : log.last(std::min(windows.overlap_window, log.size()))) {
    for (std::size_t d = 0; d < entry.sources_used.size() && d < entry.woc_scores.size(); ++d) {
      const auto s = entry.sources_used[d];
      if (s >= k) continue;
      state.avg_overlap_per_source[s] += entry.woc_scores[d];
      ++counts[s];
    }
  }
  for (std::size_t s = 0; s < k; ++s) {
    if (counts[s] > 0) state.avg_overlap_per_source[s] /= static_cast<double>(counts[s]);
  }

  state.recent_returns.assign(windows.return_window, 0.0);
  std::vector<double> opens;
  if (inputs.prices) {
    const auto returns = inputs.prices->returns_up_to(inputs.symbol, inputs.date);
    const auto n = std::min(windows.return_window, returns.size());
    std::copy(returns.end() - static_cast<std::ptrdiff_t>(n), returns.end(),
              state.recent_returns.end() - static_cast<std::ptrdiff_t>(n));
    state.returns_valid = n == windows.return_window;
    opens = inputs.prices->opens_up_to(inputs.symbol, inputs.date);
  }

  for (const auto& indicator : registry) {
    const bool enough = opens.size() >= indicator.min_observations;
    double value = enough ? indicator.compute(opens) : 0.0;
    if (!std::isfinite(value)) value = 0.0;
    state.indicators.push_back(value);
    state.indicator_valid.push_back(enough);
  }
  return state;
}

}  // namespace finrag
