// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "finrag/corpus.hpp"
#include "finrag/feedback.hpp"
#include "finrag/retrieval.hpp"

namespace finrag {

// A technical indicator computed over a symbol's opens up to the state date.
struct IndicatorFeature {
  std::string name;
  std::size_t min_observations = 0;
  std::function<double(std::span<const double> opens)> compute;
  // Maps the raw indicator to a network-friendly scale (opens passed for
  // price-relative scaling).
  std::function<double(double raw, std::span<const double> opens)> to_feature;
};

// MACD(12, 26, 9) scaled by the last open, then RSI(14) scaled to [0, 1].
std::vector<IndicatorFeature> default_indicators();

struct StateWindows {
  std::size_t accuracy_window = 50;  // trailing predictions
  std::size_t overlap_window = 50;   // trailing retrieval log entries
  std::size_t return_window = 10;    // trailing daily returns
};

struct RLState {
  std::vector<double> current_weights;
  double historical_accuracy = 0.0;
  std::vector<double> avg_overlap_per_source;
  std::vector<double> recent_returns;  // oldest first, zero-padded at the front
  std::vector<double> indicators;      // raw values, registry order (macd, rsi by default)

  // Validity flags for zero-filled features. Kept beside the feature vector so
  // its dimensionality stays fixed.
  bool accuracy_valid = false;
  bool returns_valid = false;
  std::vector<bool> indicator_valid;

  std::size_t dimension() const;
  // [weights | accuracy | overlap | returns | indicator features]
  Eigen::VectorXd features(std::span<const IndicatorFeature> registry,
                           std::span<const double> opens) const;
};

std::size_t state_dimension(std::size_t k, std::size_t return_window, std::size_t indicator_count = 2);

struct StateInputs {
  std::span<const FeedbackRecord> feedback_history;
  std::span<const RetrievalLogEntry> retrieval_log;
  const PriceTable* prices = nullptr;
  std::string_view symbol;
  Date date;
};

RLState build_state(const SourceWeights& weights, const StateInputs& inputs,
                    const StateWindows& windows, std::span<const IndicatorFeature> registry);

}  // namespace finrag
