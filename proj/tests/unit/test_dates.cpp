// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "finrag/dates.hpp"
#include "finrag/error.hpp"

using namespace finrag;
using namespace std::chrono;

TEST_CASE("dates parse and format round-trip") {
  const Date d = parse_date("2021-03-01");
  CHECK(d == Date{year{2021}, March, day{1}});
  CHECK(format_date(d) == "2021-03-01");
  CHECK(format_date(add_days(d, -1)) == "2021-02-28");
  CHECK(days_between(parse_date("2020-02-27"), parse_date("2020-03-01")) == 3);
  CHECK_THROWS_AS(parse_date("2021-02-30"), Error);
  CHECK_THROWS_AS(parse_date("2021/03/01"), Error);
  CHECK_THROWS_AS(parse_date(""), Error);
}

TEST_CASE("RFC 3339 timestamps normalize to UTC") {
  const auto a = parse_rfc3339("2021-03-01T12:00:00Z");
  const auto b = parse_rfc3339("2021-03-01T07:00:00-05:00");
  CHECK(a == b);
  CHECK(format_rfc3339(a) == "2021-03-01T12:00:00Z");
  const auto c = parse_rfc3339("2021-03-01T12:00:00.250Z");
  CHECK(format_rfc3339(c) == "2021-03-01T12:00:00.250Z");
  CHECK_THROWS_AS(parse_rfc3339("2021-03-01 12:00:00"), Error);
  CHECK_THROWS_AS(parse_rfc3339("2021-03-01T25:00:00Z"), Error);
}

TEST_CASE("New York cutoff follows daylight saving") {
  const auto clock = ExchangeClock::from_spec("09:30", "America/New_York");
  // winter: UTC-5
  CHECK(format_rfc3339(clock.cutoff_instant(parse_date("2021-03-12"))) == "2021-03-12T14:30:00Z");
  // second Sunday of March 2021 is the 14th
  CHECK(format_rfc3339(clock.cutoff_instant(parse_date("2021-03-15"))) == "2021-03-15T13:30:00Z");
  // first Sunday of November 2021 is the 7th
  CHECK(format_rfc3339(clock.cutoff_instant(parse_date("2021-11-05"))) == "2021-11-05T13:30:00Z");
  CHECK(format_rfc3339(clock.cutoff_instant(parse_date("2021-11-08"))) == "2021-11-08T14:30:00Z");
}

TEST_CASE("fixed-offset and UTC clocks") {
  CHECK(format_rfc3339(ExchangeClock::from_spec("09:30", "UTC").cutoff_instant(parse_date("2021-06-01"))) ==
        "2021-06-01T09:30:00Z");
  CHECK(format_rfc3339(ExchangeClock::from_spec("10:00", "+02:00").cutoff_instant(parse_date("2021-06-01"))) ==
        "2021-06-01T08:00:00Z");
  CHECK_THROWS_AS(ExchangeClock::from_spec("9h30", "UTC"), Error);
  CHECK_THROWS_AS(ExchangeClock::from_spec("09:30", "Mars/Olympus"), Error);
}
