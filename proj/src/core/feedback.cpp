// SPDX-License-Identifier: Apache-2.0
#include "finrag/feedback.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "finrag/text.hpp"

namespace finrag {

using nlohmann::json;

NeutralBand estimate_neutral_band(std::span<const double> returns, std::size_t window_days,
                                  std::size_t min_observations) {
  if (window_days == 0) throw Error(ErrorCode::kInvalidArgument, "window_days must be positive");
  const auto n = std::min(window_days, returns.size());
  if (n < std::max<std::size_t>(2, min_observations)) {
    throw Error(ErrorCode::kInsufficientHistory,
                std::to_string(n) + " returns in window, need " +
                    std::to_string(std::max<std::size_t>(2, min_observations)));
  }
  const auto window = returns.last(n);
  if (std::all_of(window.begin(), window.end(), [&](double r) { return r == window.front(); })) {
    return {window.front(), 0.0, window_days};
  }
  double mean = 0.0;
  for (const double r : window) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double r : window) ss += (r - mean) * (r - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1)), window_days};
}

bool evaluate_prediction(SentimentLabel label, double next_return, const NeutralBand& band) {
  switch (label) {
    case SentimentLabel::kPositive: return next_return > band.upper();
    case SentimentLabel::kNegative: return next_return < band.lower();
    case SentimentLabel::kNeutral: return band.lower() <= next_return && next_return <= band.upper();
  }
  return false;
}

double reward(bool correct) { return correct ? 1.0 : -1.0; }

FeedbackRecord make_feedback(std::string query_id, std::string symbol, Date date,
                             SentimentLabel predicted, double next_day_return,
                             const NeutralBand& band, std::vector<SourceId> sources_used) {
  FeedbackRecord r;
  r.query_id = std::move(query_id);
  r.symbol = std::move(symbol);
  r.date = date;
  r.predicted = predicted;
  r.next_day_return = next_day_return;
  r.band = band;
  r.correct = evaluate_prediction(predicted, next_day_return, band);
  std::sort(sources_used.begin(), sources_used.end());
  sources_used.erase(std::unique(sources_used.begin(), sources_used.end()), sources_used.end());
  r.sources_used = std::move(sources_used);
  r.reward = reward(r.correct);
  return r;
}

std::string to_jsonl(std::span<const FeedbackRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json record;
    record["query_id"] = r.query_id;
    record["symbol"] = r.symbol;
    record["date"] = format_date(r.date);
    record["predicted"] = std::string(to_string(r.predicted));
    record["next_day_return"] = r.next_day_return;
    record["band"] = {{"mean", r.band.mean}, {"std", r.band.std}, {"window_days", r.band.window_days}};
    record["correct"] = r.correct;
    record["sources_used"] = r.sources_used;
    record["reward"] = r.reward;
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<FeedbackRecord> parse_feedback_log(std::string_view jsonl) {
  std::vector<FeedbackRecord> records;
  std::size_t line_no = 0;
  for (const auto raw : split(jsonl, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      FeedbackRecord r;
      r.query_id = j.at("query_id").get<std::string>();
      r.symbol = j.at("symbol").get<std::string>();
      r.date = parse_date(j.at("date").get<std::string>());
      const auto label = label_from_string(j.at("predicted").get<std::string>());
      if (!label) throw Error(ErrorCode::kBadRecord, "unknown label", line_no);
      r.predicted = *label;
      r.next_day_return = j.at("next_day_return").get<double>();
      const auto& band = j.at("band");
      r.band = {band.at("mean").get<double>(), band.at("std").get<double>(),
                band.at("window_days").get<std::size_t>()};
      r.correct = j.at("correct").get<bool>();
      r.sources_used = j.at("sources_used").get<std::vector<SourceId>>();
      r.reward = j.at("reward").get<double>();
      if (r.reward != reward(r.correct)) {
        throw Error(ErrorCode::kBadRecord, "reward disagrees with correct flag", line_no);
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kBadRecord, std::string("feedback log: ") + e.what(), line_no);
    } catch (const Error& e) {
      if (e.line() != 0) throw;
      throw Error(e.code(), e.what(), line_no);
    }
  }
  return records;
}

std::vector<FeedbackRecord> load_feedback_log(const std::filesystem::path& path) {
  return parse_feedback_log(read_file(path));
}

}  // namespace finrag
