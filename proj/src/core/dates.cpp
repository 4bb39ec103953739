// SPDX-License-Identifier: Apache-2.0
#include "finrag/dates.hpp"

#include <charconv>
#include <cstdio>

#include "finrag/error.hpp"

namespace finrag {

namespace {

using namespace std::chrono;

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc{} && ptr == text.data() + pos + len;
}

[[noreturn]] void bad(std::string_view what, std::string_view text) {
  throw Error(ErrorCode::kBadTimestamp, std::string(what) + ": '" + std::string(text) + "'");
}

Date parse_date_prefix(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-' || !read_int(text, 0, 4, y) ||
      !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d)) {
    bad("malformed date", text);
  }
  Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) bad("invalid calendar date", text);
  return date;
}

// US Eastern daylight saving: second Sunday of March through first Sunday of
// November (the rule in force since 2007).
bool new_york_dst(Date date) {
  const year y = date.year();
  const sys_days second_sunday_march{y / March / Sunday[2]};
  const sys_days first_sunday_november{y / November / Sunday[1]};
  const sys_days d{date};
  return d >= second_sunday_march && d < first_sunday_november;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10) bad("malformed date", text);
  return parse_date_prefix(text);
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  const Date date = parse_date_prefix(text);
  if (text.size() < 20 || (text[10] != 'T' && text[10] != 't' && text[10] != ' ')) {
    bad("malformed timestamp", text);
  }
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(text, 11, 2, hh) || text[13] != ':' || !read_int(text, 14, 2, mm) ||
      text[16] != ':' || !read_int(text, 17, 2, ss)) {
    bad("malformed time of day", text);
  }
  if (hh > 23 || mm > 59 || ss > 60) bad("time of day out of range", text);

  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) bad("empty fractional seconds", text);
    for (int i = digits; i < 3; ++i) millis *= 10;
  }
  if (pos >= text.size()) bad("missing UTC offset", text);

  int offset_minutes = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    int oh = 0, om = 0;
    if (!read_int(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
        !read_int(text, pos + 4, 2, om)) {
      bad("malformed UTC offset", text);
    }
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    bad("malformed UTC offset", text);
  }
  if (pos != text.size()) bad("trailing characters", text);

  const auto local = sys_days{date} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
  return time_point_cast<milliseconds>(local - minutes{offset_minutes});
}

std::string format_rfc3339(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const Date date{day_point};
  const hh_mm_ss<milliseconds> tod{ts - day_point};
  char buf[40];
  const auto ms = tod.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ldZ", format_date(date).c_str(),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ld.%03ldZ", format_date(date).c_str(),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()), static_cast<long>(ms));
  }
  return buf;
}

Date add_days(Date date, int n) { return Date{sys_days{date} + days{n}}; }

int days_between(Date from, Date to) {
  return static_cast<int>((sys_days{to} - sys_days{from}).count());
}

ExchangeClock::ExchangeClock(int cutoff_minutes, Zone zone, int fixed_offset_minutes)
    : cutoff_minutes_(cutoff_minutes), zone_(zone), fixed_offset_minutes_(fixed_offset_minutes) {
  if (cutoff_minutes < 0 || cutoff_minutes >= 24 * 60) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff must be within a day");
  }
}

ExchangeClock ExchangeClock::from_spec(std::string_view cutoff_hhmm, std::string_view zone) {
  int hh = 0, mm = 0;
  if (cutoff_hhmm.size() != 5 || cutoff_hhmm[2] != ':' || !read_int(cutoff_hhmm, 0, 2, hh) ||
      !read_int(cutoff_hhmm, 3, 2, mm) || hh > 23 || mm > 59) {
    throw Error(ErrorCode::kConfig, "cutoff must be HH:MM, got '" + std::string(cutoff_hhmm) + "'");
  }
  const int cutoff = hh * 60 + mm;
  if (zone == "America/New_York") return ExchangeClock(cutoff, Zone::kNewYork);
  if (zone == "UTC" || zone == "Z") return ExchangeClock(cutoff, Zone::kFixedOffset, 0);
  int oh = 0, om = 0;
  if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':' &&
      read_int(zone, 1, 2, oh) && read_int(zone, 4, 2, om)) {
    const int sign = zone[0] == '-' ? -1 : 1;
    return ExchangeClock(cutoff, Zone::kFixedOffset, sign * (oh * 60 + om));
  }
  throw Error(ErrorCode::kConfig, "unsupported exchange timezone '" + std::string(zone) + "'");
}

int ExchangeClock::utc_offset_minutes(Date date) const {
  if (zone_ == Zone::kFixedOffset) return fixed_offset_minutes_;
  return new_york_dst(date) ? -4 * 60 : -5 * 60;
}

Timestamp ExchangeClock::cutoff_instant(Date date) const {
  const auto local = sys_days{date} + minutes{cutoff_minutes_};
  return time_point_cast<milliseconds>(local - minutes{utc_offset_minutes(date)});
}

}  // namespace finrag
