#include "doctest.h"
#include "tripkg/datetime.hpp"

using namespace tripkg;

TEST_CASE("date parsing accepts strict ISO dates only") {
  auto d = Date::parse("2019-08-01");
  REQUIRE(d.has_value());
  CHECK(d->to_string() == "2019-08-01");
  CHECK(!Date::parse("2019-8-1"));
  CHECK(!Date::parse("2019/08/01"));
  CHECK(!Date::parse("2019-02-30"));
  CHECK(!Date::parse("2019-13-01"));
  CHECK(!Date::parse(""));
  CHECK(Date::parse("2020-02-29").has_value());  // leap day
  CHECK(!Date::parse("2019-02-29"));
}

TEST_CASE("weekday matches the civil calendar") {
  CHECK(Date::parse("2019-08-03")->weekday() == 6);  // Saturday
  CHECK(Date::parse("2019-08-04")->weekday() == 0);  // Sunday
  CHECK(Date::parse("2019-08-01")->weekday() == 4);  // Thursday
}

TEST_CASE("time of day parsing") {
  auto t = TimeOfDay::parse("09:30:00");
  REQUIRE(t.has_value());
  CHECK(t->seconds == 9 * 3600 + 30 * 60);
  CHECK(t->to_string() == "09:30:00");
  CHECK(!TimeOfDay::parse("25:00:00"));
  CHECK(!TimeOfDay::parse("09:60:00"));
  CHECK(!TimeOfDay::parse("09:30"));
  CHECK(TimeOfDay::parse("00:00:00")->seconds == 0);
  CHECK(TimeOfDay::parse("23:59:59")->seconds == 86399);
}

TEST_CASE("date ordering and round trip") {
  const auto a = *Date::parse("2019-08-31");
  CHECK(a.next().to_string() == "2019-09-01");
  CHECK(*Date::parse("2019-08-01") < *Date::parse("2019-08-02"));
}
