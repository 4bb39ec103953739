// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finrag/corpus.hpp"
#include "finrag/sentiment.hpp"

namespace finrag {

// mean ± std of a symbol's recent daily returns; the "neutral" movement range.
struct NeutralBand {
  double mean = 0.0;
  double std = 0.0;
  std::size_t window_days = 0;

  double lower() const { return mean - std; }
  double upper() const { return mean + std; }
};

// Sample mean and sample standard deviation (n - 1) over the trailing
// `window_days` returns. Throws Error(kInsufficientHistory) when fewer than
// max(2, min_observations) returns fall inside the window.
NeutralBand estimate_neutral_band(std::span<const double> returns, std::size_t window_days,
                                  std::size_t min_observations = 2);

// positive: next_return > upper; negative: next_return < lower;
// neutral: lower <= next_return <= upper.
bool evaluate_prediction(SentimentLabel label, double next_return, const NeutralBand& band);

double reward(bool correct);

struct FeedbackRecord {
  std::string query_id;
  std::string symbol;
  Date date;
  SentimentLabel predicted = SentimentLabel::kNeutral;
  double next_day_return = 0.0;
  NeutralBand band;
  bool correct = false;
  std::vector<SourceId> sources_used;  // sorted, unique
  double reward = -1.0;
};

FeedbackRecord make_feedback(std::string query_id, std::string symbol, Date date,
                             SentimentLabel predicted, double next_day_return,
                             const NeutralBand& band, std::vector<SourceId> sources_used);

std::string to_jsonl(std::span<const FeedbackRecord> records);
std::vector<FeedbackRecord> parse_feedback_log(std::string_view jsonl);
std::vector<FeedbackRecord> load_feedback_log(const std::filesystem::path& path);

}  // namespace finrag
