// SPDX-License-Identifier: Apache-2.0
#include "finrag/indicators.hpp"

#include <string>

#include "finrag/error.hpp"

namespace finrag {

std::vector<double> ema(std::span<const double> values, std::size_t period) {
  if (period == 0) throw Error(ErrorCode::kInvalidArgument, "EMA period must be positive");
  if (values.size() < period) {
    throw Error(ErrorCode::kInsufficientHistory,
                "EMA(" + std::to_string(period) + ") needs " + std::to_string(period) + " values");
  }
  const double k = 2.0 / (static_cast<double>(period) + 1.0);
  double seed = 0.0;
  for (std::size_t i = 0; i < period; ++i) seed += values[i];
  std::vector<double> out;
  out.reserve(values.size() - period + 1);
  out.push_back(seed / static_cast<double>(period));
  for (std::size_t i = period; i < values.size(); ++i) {
    out.push_back(out.back() + k * (values[i] - out.back()));
  }
  return out;
}

double macd(std::span<const double> prices, std::size_t fast, std::size_t slow, std::size_t signal) {
  if (fast == 0 || slow == 0 || signal == 0 || fast >= slow) {
    throw Error(ErrorCode::kInvalidArgument, "MACD needs 0 < fast < slow and signal > 0");
  }
  if (prices.size() < slow + signal) {
    throw Error(ErrorCode::kInsufficientHistory,
                "MACD needs " + std::to_string(slow + signal) + " observations, got " +
                    std::to_string(prices.size()));
  }
  const auto fast_ema = ema(prices, fast);
  const auto slow_ema = ema(prices, slow);
  // align both on the slow EMA's first index
  std::vector<double> line(slow_ema.size());
  const std::size_t offset = slow - fast;
  for (std::size_t i = 0; i < slow_ema.size(); ++i) line[i] = fast_ema[i + offset] - slow_ema[i];
  const auto signal_line = ema(line, signal);
  return line.back() - signal_line.back();
}

double rsi(std::span<const double> prices, std::size_t period) {
  if (period == 0) throw Error(ErrorCode::kInvalidArgument, "RSI period must be positive");
  if (prices.size() < period + 1) {
    throw Error(ErrorCode::kInsufficientHistory,
                "RSI needs " + std::to_string(period + 1) + " observations, got " +
                    std::to_string(prices.size()));
  }
  double gain = 0.0;
  double loss = 0.0;
  for (std::size_t i = prices.size() - period; i < prices.size(); ++i) {
    const double change = prices[i] - prices[i - 1];
    if (change > 0) gain += change;
    else loss -= change;
  }
  if (loss == 0.0) return 100.0;
  const double rs = (gain / static_cast<double>(period)) / (loss / static_cast<double>(period));
  return 100.0 - 100.0 / (1.0 + rs);
}

}  // namespace finrag
