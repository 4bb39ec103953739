// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "finrag/corpus.hpp"
#include "finrag/retrieval.hpp"
#include "finrag/sentiment.hpp"

namespace finrag {

enum class PositionSignal { kLong, kShort, kHold };
enum class Side { kFlat, kLong, kShort };

std::string_view to_string(PositionSignal signal);
std::string_view to_string(Side side);

struct CostModel {
  double per_trade_bps = 10.0;
  void validate() const;
};

struct PortfolioState {
  Date date{};
  std::map<std::string, Side, std::less<>> positions;  // absent = flat
  double cumulative_return = 0.0;
};

// Per-item classifier for the daily aggregate; nullopt marks an unparseable reply.
using ItemClassifier = std::function<std::optional<SentimentLabel>(const Document&)>;

// Mean score over min(n, items.size()) items drawn without replacement;
// unparseable items are skipped; 0 when nothing is scored.
double daily_sentiment_score(std::span<const Document* const> items, std::size_t n,
                             std::mt19937_64& rng, const ItemClassifier& classify);

// >= 0.1 long, <= -0.1 short, otherwise hold.
PositionSignal position_signal(double score);

struct DayRecord {
  Date date{};       // rebalance date; the return runs to `next_date`
  Date next_date{};
  std::vector<std::string> longs;
  std::vector<std::string> shorts;
  double long_notional = 0.0;   // 1 when the side is nonempty
  double short_notional = 0.0;
  std::size_t trades = 0;
  double turnover = 0.0;
  double cost = 0.0;
  double day_return = 0.0;
};

struct RebalanceResult {
  PortfolioState state;
  DayRecord day;
};

// Applies the signals at `state.date`'s open and marks the book to `next_date`'s
// open. Hold keeps the previous side. Turnover is trades / signals.size(), a
// flip counting two trades. Throws Error(kMissingBar) when a held symbol lacks
// a bar on either date.
RebalanceResult rebalance(const PortfolioState& state,
                          const std::map<std::string, PositionSignal, std::less<>>& signals,
                          const PriceTable& prices, Date next_date, const CostModel& cost);

struct Metrics {
  double cumulative_return = 0.0;
  double annualized_return = 0.0;
  double annualized_volatility = 0.0;
  std::optional<double> sharpe_ratio;  // empty when volatility is zero
  double max_drawdown = 0.0;
  std::size_t trading_days = 0;  // number of daily returns
};

// Throws Error(kInvalidArgument) for fewer than two points and
// Error(kZeroVolatility) when the daily returns have zero spread.
Metrics compute_metrics(std::span<const double> curve);
// As compute_metrics, but a zero-spread curve leaves sharpe_ratio empty.
Metrics summarize_curve(std::span<const double> curve);
double max_drawdown(std::span<const double> curve);

struct CurvePoint {
  Date date{};
  double portfolio = 1.0;  // compounded value, starts at 1
  std::optional<double> benchmark;
};

struct BacktestReport {
  std::vector<CurvePoint> curve;
  std::vector<DayRecord> days;
  Metrics metrics;
  std::optional<Metrics> benchmark_metrics;
  std::size_t universe_size = 0;
  double cost_bps = 0.0;
  std::uint64_t seed = 0;
};

using ScoreFunction = std::function<double(const std::string& symbol, Date date)>;

struct BacktestWindow {
  std::vector<std::string> universe;
  Date start{};
  Date end{};
  std::string benchmark;  // empty: no benchmark column
};

// Walks the union of the universe's trading dates in [start, end]. Throws
// Error(kNoTradingDays) when fewer than two dates remain.
BacktestReport run_backtest(const PriceTable& prices, const ScoreFunction& score,
                            const BacktestWindow& window, const CostModel& cost,
                            std::uint64_t seed = 0);

// `date,portfolio_cum_return,benchmark_cum_return`
std::string curve_csv(const BacktestReport& report);
std::string report_json(const BacktestReport& report);

// Share of retrieved documents per source; sums to 1. Throws Error(kEmptyLog)
// when the log has no retrieved documents.
std::vector<double> weight_distribution_report(std::span<const RetrievalLogEntry> log, std::size_t k);
std::string weight_distribution_json(std::span<const double> proportions, const SourceCatalog& catalog);

}  // namespace finrag
