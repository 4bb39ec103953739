// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace finrag {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// YYYY-MM-DD. Throws Error(kBadTimestamp) on malformed or invalid dates.
Date parse_date(std::string_view text);
std::string format_date(Date date);

// RFC 3339 date-time ("2021-03-01T12:00:00Z", "...+05:00", optional
// fractional seconds down to milliseconds). Normalized to UTC.
Timestamp parse_rfc3339(std::string_view text);
std::string format_rfc3339(Timestamp ts);

Date add_days(Date date, int days);
int days_between(Date from, Date to);

// Exchange-day boundary. A document timestamped strictly before the cutoff
// instant of day T is available for trading on day T.
class ExchangeClock {
 public:
  enum class Zone { kNewYork, kFixedOffset };

  ExchangeClock() = default;
  ExchangeClock(int cutoff_minutes, Zone zone, int fixed_offset_minutes = 0);

  // "America/New_York", "UTC", or a fixed "+HH:MM"/"-HH:MM" offset.
  static ExchangeClock from_spec(std::string_view cutoff_hhmm, std::string_view zone);

  Timestamp cutoff_instant(Date date) const;
  // Minutes to add to UTC to obtain local exchange time on `date`.
  int utc_offset_minutes(Date date) const;

  int cutoff_minutes() const { return cutoff_minutes_; }

 private:
  int cutoff_minutes_ = 9 * 60 + 30;
  Zone zone_ = Zone::kNewYork;
  int fixed_offset_minutes_ = 0;
};

}  // namespace finrag
