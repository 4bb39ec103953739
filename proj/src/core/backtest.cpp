// SPDX-License-Identifier: Apache-2.0
#include "finrag/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>

#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "log.hpp"

namespace finrag {

namespace {

constexpr double kSignalThreshold = 0.1;
constexpr double kTradingDaysPerYear = 252.0;

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

Metrics summarize_curve(std::span<const double> curve) {
  if (curve.size() < 2) throw Error(ErrorCode::kInvalidArgument, "metrics need at least two curve points");
  Metrics m;
  m.trading_days = curve.size() - 1;
  std::vector<double> daily;
  daily.reserve(m.trading_days);
  for (std::size_t t = 1; t < curve.size(); ++t) daily.push_back(curve[t] / curve[t - 1] - 1.0);
  m.cumulative_return = curve.back() / curve.front() - 1.0;
  m.annualized_return =
      std::pow(1.0 + m.cumulative_return, kTradingDaysPerYear / static_cast<double>(m.trading_days)) - 1.0;
  if (daily.size() >= 2) {
    const double mu = mean_of(daily);
    double ss = 0.0;
    for (const double r : daily) ss += (r - mu) * (r - mu);
    m.annualized_volatility = std::sqrt(ss / static_cast<double>(daily.size() - 1)) * std::sqrt(kTradingDaysPerYear);
  }
  if (m.annualized_volatility > 0.0) m.sharpe_ratio = m.annualized_return / m.annualized_volatility;
  m.max_drawdown = max_drawdown(curve);
  return m;
}

namespace {

nlohmann::ordered_json metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["Cumulative Return"] = m.cumulative_return;
  j["Annualized Return"] = m.annualized_return;
  j["Annualized Volatility"] = m.annualized_volatility;
  j["Sharpe Ratio"] = m.sharpe_ratio ? nlohmann::ordered_json(*m.sharpe_ratio) : nlohmann::ordered_json(nullptr);
  j["Max Drawdown"] = m.max_drawdown;
  j["Trading Days"] = m.trading_days;
  return j;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string_view to_string(PositionSignal signal) {
  switch (signal) {
    case PositionSignal::kLong: return "long";
    case PositionSignal::kShort: return "short";
    case PositionSignal::kHold: return "hold";
  }
  return "hold";
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::kLong: return "long";
    case Side::kShort: return "short";
    case Side::kFlat: return "flat";
  }
  return "flat";
}

void CostModel::validate() const {
  if (!(per_trade_bps >= 0.0) || !std::isfinite(per_trade_bps)) {
    throw Error(ErrorCode::kConfig, "per_trade_bps must be a finite non-negative number");
  }
}

double daily_sentiment_score(std::span<const Document* const> items, std::size_t n,
                             std::mt19937_64& rng, const ItemClassifier& classify) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample size must be positive");
  std::vector<const Document*> picked;
  picked.reserve(std::min(n, items.size()));
  std::sample(items.begin(), items.end(), std::back_inserter(picked), n, rng);
  int total = 0;
  std::size_t scored = 0;
  for (const Document* doc : picked) {
    const auto label = classify(*doc);
    if (!label) {
      detail::log().warn("skipping unparseable reply for {}", doc->doc_id);
      continue;
    }
    total += score(*label);
    ++scored;
  }
  return scored == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(scored);
}

PositionSignal position_signal(double score) {
  if (score >= kSignalThreshold) return PositionSignal::kLong;
  if (score <= -kSignalThreshold) return PositionSignal::kShort;
  return PositionSignal::kHold;
}

RebalanceResult rebalance(const PortfolioState& state,
                          const std::map<std::string, PositionSignal, std::less<>>& signals,
                          const PriceTable& prices, Date next_date, const CostModel& cost) {
  cost.validate();
  if (signals.empty()) throw Error(ErrorCode::kInvalidArgument, "rebalance needs a nonempty universe");
  RebalanceResult out;
  out.state.date = next_date;
  out.day.date = state.date;
  out.day.next_date = next_date;

  std::vector<double> long_returns;
  std::vector<double> short_returns;
  for (const auto& [symbol, signal] : signals) {
    const auto it = state.positions.find(symbol);
    const Side before = it == state.positions.end() ? Side::kFlat : it->second;
    Side after = before;
    if (signal == PositionSignal::kLong) after = Side::kLong;
    if (signal == PositionSignal::kShort) after = Side::kShort;
    if (before != after) out.day.trades += (before == Side::kFlat || after == Side::kFlat) ? 1 : 2;
    if (after == Side::kFlat) continue;
    out.state.positions.emplace(symbol, after);

    const auto p0 = prices.open(symbol, state.date);
    const auto p1 = prices.open(symbol, next_date);
    if (!p0 || !p1) {
      throw Error(ErrorCode::kMissingBar, "no bar for " + symbol + " on " +
                                              format_date(p0 ? next_date : state.date));
    }
    const double r = *p1 / *p0 - 1.0;
    if (after == Side::kLong) {
      long_returns.push_back(r);
      out.day.longs.push_back(symbol);
    } else {
      short_returns.push_back(r);
      out.day.shorts.push_back(symbol);
    }
  }
  out.day.long_notional = long_returns.empty() ? 0.0 : 1.0;
  out.day.short_notional = short_returns.empty() ? 0.0 : 1.0;
  if (long_returns.empty() != short_returns.empty()) {
    detail::log().warn("one-sided book on {}", format_date(state.date));
  }
  out.day.turnover = static_cast<double>(out.day.trades) / static_cast<double>(signals.size());
  out.day.cost = out.day.turnover * cost.per_trade_bps / 10000.0;
  out.day.day_return = mean_of(long_returns) - mean_of(short_returns) - out.day.cost;
  out.state.cumulative_return = (1.0 + state.cumulative_return) * (1.0 + out.day.day_return) - 1.0;
  return out;
}

double max_drawdown(std::span<const double> curve) {
  double peak = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const double c : curve) {
    peak = std::max(peak, c);
    worst = std::min(worst, c / peak - 1.0);
  }
  return worst;
}

Metrics compute_metrics(std::span<const double> curve) {
  Metrics m = summarize_curve(curve);
  if (!m.sharpe_ratio) throw Error(ErrorCode::kZeroVolatility, "daily returns have zero volatility");
  return m;
}

BacktestReport run_backtest(const PriceTable& prices, const ScoreFunction& score,
                            const BacktestWindow& window, const CostModel& cost, std::uint64_t seed) {
  cost.validate();
  if (window.universe.empty()) throw Error(ErrorCode::kInvalidArgument, "backtest universe is empty");
  if (!(window.start < window.end)) throw Error(ErrorCode::kInvalidArgument, "backtest start must precede end");
  const auto dates = prices.trading_dates(window.universe, window.start, window.end);
  if (dates.size() < 2) {
    throw Error(ErrorCode::kNoTradingDays, "fewer than two trading days between " + format_date(window.start) +
                                               " and " + format_date(window.end));
  }

  BacktestReport report;
  report.universe_size = window.universe.size();
  report.cost_bps = cost.per_trade_bps;
  report.seed = seed;

  std::optional<double> bench0;
  if (!window.benchmark.empty()) {
    bench0 = prices.open(window.benchmark, dates.front());
    if (!bench0) {
      throw Error(ErrorCode::kMissingBar, "no benchmark bar for " + window.benchmark + " on " +
                                              format_date(dates.front()));
    }
  }
  const auto bench_at = [&](Date d) -> std::optional<double> {
    if (!bench0) return std::nullopt;
    const auto p = prices.open(window.benchmark, d);
    if (!p) throw Error(ErrorCode::kMissingBar, "no benchmark bar for " + window.benchmark + " on " + format_date(d));
    return *p / *bench0;
  };

  PortfolioState state;
  state.date = dates.front();
  report.curve.push_back({dates.front(), 1.0, bench_at(dates.front())});
  double value = 1.0;
  for (std::size_t i = 0; i + 1 < dates.size(); ++i) {
    std::map<std::string, PositionSignal, std::less<>> signals;
    for (const auto& symbol : window.universe) signals[symbol] = position_signal(score(symbol, dates[i]));
    auto step = rebalance(state, signals, prices, dates[i + 1], cost);
    value *= 1.0 + step.day.day_return;
    report.days.push_back(std::move(step.day));
    state = std::move(step.state);
    report.curve.push_back({dates[i + 1], value, bench_at(dates[i + 1])});
  }

  std::vector<double> values;
  std::vector<double> bench;
  for (const auto& p : report.curve) {
    values.push_back(p.portfolio);
    if (p.benchmark) bench.push_back(*p.benchmark);
  }
  report.metrics = summarize_curve(values);
  if (!report.metrics.sharpe_ratio) detail::log().warn("portfolio volatility is zero; Sharpe ratio undefined");
  if (bench0) report.benchmark_metrics = summarize_curve(bench);
  return report;
}

std::string curve_csv(const BacktestReport& report) {
  std::string out = "date,portfolio_cum_return,benchmark_cum_return\n";
  for (const auto& p : report.curve) {
    out += format_date(p.date);
    out += ',';
    out += fmt(p.portfolio - 1.0);
    out += ',';
    if (p.benchmark) out += fmt(*p.benchmark - 1.0);
    out += '\n';
  }
  return out;
}

std::string report_json(const BacktestReport& report) {
  nlohmann::ordered_json j = metrics_json(report.metrics);
  j["Benchmark"] = report.benchmark_metrics ? metrics_json(*report.benchmark_metrics) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json meta;
  meta["universe_size"] = report.universe_size;
  meta["cost_bps"] = report.cost_bps;
  meta["seed"] = report.seed;
  meta["start"] = report.curve.empty() ? "" : format_date(report.curve.front().date);
  meta["end"] = report.curve.empty() ? "" : format_date(report.curve.back().date);
  j["metadata"] = meta;
  return j.dump(2) + "\n";
}

std::vector<double> weight_distribution_report(std::span<const RetrievalLogEntry> log, std::size_t k) {
  std::vector<double> counts(k, 0.0);
  std::size_t total = 0;
  for (const auto& entry : log) {
    for (const SourceId s : entry.sources_used) {
      if (s >= k) throw Error(ErrorCode::kSourceIndexOutOfRange, "source index " + std::to_string(s) + " out of range");
      counts[s] += 1.0;
      ++total;
    }
  }
  if (total == 0) throw Error(ErrorCode::kEmptyLog, "retrieval log has no retrieved documents");
  for (double& c : counts) c /= static_cast<double>(total);
  return counts;
}

std::string weight_distribution_json(std::span<const double> proportions, const SourceCatalog& catalog) {
  if (proportions.size() != catalog.size()) throw Error(ErrorCode::kInvalidArgument, "catalog size mismatch");
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < proportions.size(); ++i) j[catalog.at(i).name] = proportions[i];
  return j.dump(2) + "\n";
}

}  // namespace finrag
