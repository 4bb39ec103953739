// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace finrag {

// Exponential moving average with smoothing 2/(period+1), seeded with the
// simple average of the first `period` values. Element i of the result
// corresponds to input index period-1+i.
std::vector<double> ema(std::span<const double> values, std::size_t period);

// MACD histogram at the last observation: (EMA_fast - EMA_slow) minus the
// signal-line EMA of that difference. Needs >= slow + signal observations.
double macd(std::span<const double> prices, std::size_t fast = 12, std::size_t slow = 26,
            std::size_t signal = 9);

// Relative strength index over the last `period` price changes using simple
// averages; 100 when there are no losses. Needs >= period + 1 observations.
double rsi(std::span<const double> prices, std::size_t period = 14);

}  // namespace finrag
