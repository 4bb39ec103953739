// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "finrag/indicators.hpp"
#include "finrag/rl_state.hpp"
#include "synthetic.hpp"

using namespace finrag;

namespace {

PriceTable walk(std::size_t n) {
  std::vector<DailyBar> bars;
  const auto days = synth::business_days(parse_date("2021-01-04"), n);
  double p = 100.0;
  for (std::size_t i = 0; i < n; ++i) {
    p *= 1.0 + 0.01 * std::sin(static_cast<double>(i));
    bars.push_back({days[i], "AAA", p});
  }
  return PriceTable(bars);
}

FeedbackRecord fb(bool correct) {
  FeedbackRecord r;
  r.correct = correct;
  return r;
}

}  // namespace

TEST_CASE("empty history zero-fills") {
  const auto registry = default_indicators();
  const StateInputs in{{}, {}, nullptr, "AAA", parse_date("2021-03-01")};
  const auto s = build_state(SourceWeights::uniform(4), in, StateWindows{}, registry);
  CHECK(s.historical_accuracy == 0.0);
  CHECK_FALSE(s.accuracy_valid);
  CHECK_FALSE(s.returns_valid);
  CHECK(s.dimension() == state_dimension(4, 10));
  const auto x = s.features(registry, {});
  REQUIRE(x.size() == static_cast<Eigen::Index>(2 * 4 + 3 + 10));
  for (int i = 0; i < 4; ++i) CHECK(x[i] == 0.25);
  for (Eigen::Index i = 4; i < x.size(); ++i) CHECK(x[i] == 0.0);
}

TEST_CASE("accuracy over the trailing window") {
  const auto registry = default_indicators();
  std::vector<FeedbackRecord> history{fb(false), fb(false), fb(true), fb(true), fb(true)};
  StateWindows windows;
  windows.accuracy_window = 3;
  const StateInputs in{history, {}, nullptr, "AAA", parse_date("2021-03-01")};
  const auto s = build_state(SourceWeights::uniform(2), in, windows, registry);
  CHECK(s.historical_accuracy == 1.0);
  CHECK(s.accuracy_valid);
  windows.accuracy_window = 5;
  CHECK(build_state(SourceWeights::uniform(2), in, windows, registry).historical_accuracy == 0.6);
}

TEST_CASE("overlap averages per source") {
  const auto registry = default_indicators();
  std::vector<RetrievalLogEntry> log(2);
  log[0].sources_used = {0, 1, 0};
  log[0].woc_scores = {0.2, 0.1, 0.4};
  log[1].sources_used = {0};
  log[1].woc_scores = {0.3};
  const StateInputs in{{}, log, nullptr, "AAA", parse_date("2021-03-01")};
  const auto s = build_state(SourceWeights::uniform(3), in, StateWindows{}, registry);
  CHECK(s.avg_overlap_per_source[0] == doctest::Approx(0.3));
  CHECK(s.avg_overlap_per_source[1] == doctest::Approx(0.1));
  CHECK(s.avg_overlap_per_source[2] == 0.0);
}

TEST_CASE("market features from prices") {
  const auto registry = default_indicators();
  const auto prices = walk(80);
  const auto date = prices.series("AAA").back().date;
  const StateInputs in{{}, {}, &prices, "AAA", date};
  const auto s = build_state(SourceWeights::uniform(2), in, StateWindows{}, registry);
  CHECK(s.returns_valid);
  const auto returns = prices.returns_up_to("AAA", date);
  for (std::size_t i = 0; i < 10; ++i) CHECK(s.recent_returns[i] == returns[returns.size() - 10 + i]);
  const auto opens = prices.opens_up_to("AAA", date);
  REQUIRE(s.indicators.size() == 2);
  CHECK(s.indicators[0] == macd(opens));
  CHECK(s.indicators[1] == rsi(opens));
  const auto x = s.features(registry, opens);
  CHECK(x[x.size() - 2] == macd(opens) / opens.back());
  CHECK(x[x.size() - 1] == rsi(opens) / 100.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(std::isfinite(x[i]));

  // short history: MACD flagged invalid, RSI available
  const auto early = prices.series("AAA")[20].date;
  const StateInputs in2{{}, {}, &prices, "AAA", early};
  const auto s2 = build_state(SourceWeights::uniform(2), in2, StateWindows{}, registry);
  CHECK_FALSE(s2.indicator_valid[0]);
  CHECK(s2.indicator_valid[1]);
  CHECK(s2.dimension() == s.dimension());
}
