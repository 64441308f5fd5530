#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tripkg/records.hpp"
#include "tripkg/rng.hpp"

using namespace tripkg;
using namespace tripkg::ingest;

namespace {

ParseResult parse(const std::string& text,
                  const std::optional<std::set<std::string>>& whitelist = {}) {
  std::istringstream in(text);
  return parse_records(in, whitelist);
}

}  // namespace

TEST_CASE("table-8 row parses into a record") {
  const auto res = parse("Vehicle,Date,Ftime,Fzone,Tzone\nV1,2019-08-01,09:30:00,Z3,Z7\n");
  REQUIRE(res.records.size() == 1);
  CHECK(res.rejected.empty());
  const auto& r = res.records[0];
  CHECK(r.vehicle == "V1");
  CHECK(r.date.to_string() == "2019-08-01");
  CHECK(r.ftime.to_string() == "09:30:00");
  CHECK(r.fzone == "Z3");
  CHECK(r.tzone == "Z7");
}

TEST_CASE("empty input after header yields nothing") {
  const auto res = parse("Vehicle,Date,Ftime,Fzone,Tzone\n");
  CHECK(res.records.empty());
  CHECK(res.rejected.empty());
}

TEST_CASE("out-of-range time is rejected, not fatal") {
  const auto res = parse(
      "Vehicle,Date,Ftime,Fzone,Tzone\n"
      "V1,2019-08-01,25:00:00,Z3,Z7\n"
      "V2,2019-08-01,10:00:00,Z1,Z2\n");
  REQUIRE(res.records.size() == 1);
  REQUIRE(res.rejected.size() == 1);
  CHECK(res.rejected[0].row == 1);
  CHECK(res.rejected[0].reason == "bad-time");
}

TEST_CASE("rejection reasons cover dates, fields, and zones") {
  const auto res = parse(
      "Vehicle,Date,Ftime,Fzone,Tzone\n"
      "V1,2019-99-01,09:00:00,Z1,Z2\n"
      "V2,2019-08-01,09:00:00,Z1\n"
      ",2019-08-01,09:00:00,Z1,Z2\n"
      "V4,2019-08-01,09:00:00,Z1,ZX\n",
      std::set<std::string>{"Z1", "Z2"});
  CHECK(res.records.empty());
  REQUIRE(res.rejected.size() == 4);
  CHECK(res.rejected[0].reason == "bad-date");
  CHECK(res.rejected[1].reason == "bad-field-count");
  CHECK(res.rejected[2].reason == "empty-field");
  CHECK(res.rejected[3].reason == "unknown-zone");
  CHECK(res.rejected[3].row == 4);
}

TEST_CASE("header order does not matter and extra columns are ignored") {
  const auto res = parse(
      "Extra,Tzone,Ftime,Vehicle,Fzone,Date\n"
      "x,Z7,09:30:00,V1,Z3,2019-08-01\n");
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].vehicle == "V1");
  CHECK(res.records[0].tzone == "Z7");
}

TEST_CASE("missing header field is fatal") {
  std::istringstream in("Vehicle,Date,Ftime,Fzone\nV1,2019-08-01,09:30:00,Z3\n");
  CHECK_THROWS(parse_records(in));
}

TEST_CASE("acceptance is independent of row order") {
  const std::string header = "Vehicle,Date,Ftime,Fzone,Tzone\n";
  std::vector<std::string> rows = {
      "V1,2019-08-01,09:30:00,Z3,Z7", "V2,2019-08-01,25:00:00,Z1,Z2",
      "V3,2019-08-02,11:00:00,Z2,Z4", "V4,bad,11:00:00,Z2,Z4",
      "V5,2019-08-03,23:59:59,Z5,Z5",
  };
  auto join = [&] {
    std::string s = header;
    for (const auto& r : rows) s += r + "\n";
    return s;
  };
  const auto baseline = parse(join());
  auto sorted_keys = [](const ParseResult& res) {
    std::vector<std::string> keys;
    for (const auto& r : res.records)
      keys.push_back(r.vehicle + "|" + r.date.to_string() + "|" + r.ftime.to_string());
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto shuffled = parse(join());
    CHECK(sorted_keys(shuffled) == sorted_keys(baseline));
    CHECK(shuffled.rejected.size() == baseline.rejected.size());
  }
}

TEST_CASE("record serialization round trips") {
  std::mt19937_64 rng(11);
  std::vector<TripRecord> records;
  for (int i = 0; i < 200; ++i) {
    TripRecord r;
    r.vehicle = "V" + std::to_string(uniform_index(rng, 40));
    r.date = Date{Date::parse("2019-08-01")->days + std::int32_t(uniform_index(rng, 30))};
    r.ftime = TimeOfDay{std::int32_t(uniform_index(rng, kSecondsPerDay))};
    r.fzone = "Z" + std::to_string(uniform_index(rng, 20));
    r.tzone = "Z" + std::to_string(uniform_index(rng, 20));
    records.push_back(std::move(r));
  }
  std::ostringstream out;
  write_records(out, records);
  std::istringstream in(out.str());
  const auto back = parse_records(in);
  CHECK(back.rejected.empty());
  CHECK(back.records == records);
}

TEST_CASE("duplicate rows are kept as distinct trips") {
  const auto res = parse(
      "Vehicle,Date,Ftime,Fzone,Tzone\n"
      "V1,2019-08-01,09:30:00,Z3,Z7\n"
      "V1,2019-08-01,09:30:00,Z3,Z7\n");
  CHECK(res.records.size() == 2);
}

TEST_CASE("reject report serialization") {
  std::ostringstream out;
  write_rejects(out, std::vector<RejectedRow>{{3, "bad-time"}, {9, "bad-date"}});
  CHECK(out.str() == "row,reason\n3,bad-time\n9,bad-date\n");
}
