#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tripkg/graph.hpp"
#include "tripkg/rng.hpp"

using namespace tripkg;
using namespace tripkg::ingest;
using namespace tripkg::kg;

namespace {

TripRecord rec(std::string vehicle, std::string date, std::string ftime, std::string fz,
               std::string tz) {
  return {std::move(vehicle), *Date::parse(date), *TimeOfDay::parse(ftime), std::move(fz),
          std::move(tz)};
}

TripKG build(const std::vector<TripRecord>& records) {
  return build_graph(records, CalendarConfig::defaults(), TimeSpanConfig::defaults());
}

std::vector<TripRecord> random_records(std::mt19937_64& rng, int n, int vehicles = 12,
                                       int days = 6, int zones = 8) {
  std::vector<TripRecord> records;
  for (int i = 0; i < n; ++i) {
    records.push_back(rec("V" + std::to_string(uniform_index(rng, vehicles)),
                          Date{Date::parse("2019-08-01")->days +
                               std::int32_t(uniform_index(rng, std::size_t(days)))}
                              .to_string(),
                          TimeOfDay{std::int32_t(uniform_index(rng, kSecondsPerDay))}.to_string(),
                          "Z" + std::to_string(uniform_index(rng, zones)),
                          "Z" + std::to_string(uniform_index(rng, zones))));
  }
  return records;
}

std::string export_string(const TripKG& g) {
  std::ostringstream t, p;
  export_triples(g, t);
  export_properties(g, p);
  return t.str() + "\x1e" + p.str();
}

}  // namespace

TEST_CASE("one record produces one trip, one vehicle, six triples") {
  const auto g = build({rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7")});
  CHECK(g.entity_count(EntityType::Trip) == 1);
  CHECK(g.entity_count(EntityType::Vehicle) == 1);
  CHECK(g.triple_count() == 6);
  CHECK(g.entity_count(EntityType::Zone) == 2);
  CHECK(g.entity_count(EntityType::Week) == 1);
  check_schema(g);
}

TEST_CASE("zero records produce an empty graph") {
  const auto g = build({});
  CHECK(g.entity_count() == 0);
  CHECK(g.triple_count() == 0);
}

TEST_CASE("two records for one vehicle share the vehicle entity") {
  const auto g = build({rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7"),
                        rec("V1", "2019-08-01", "12:00:00", "Z7", "Z3")});
  CHECK(g.entity_count(EntityType::Vehicle) == 1);
  CHECK(g.entity_count(EntityType::Trip) == 2);
  CHECK(g.triple_count() == 12);
}

TEST_CASE("get_entity finds ingested entities and misses others") {
  const auto g = build({rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7")});
  CHECK(get_entity(g, EntityType::Vehicle, "V1").has_value());
  CHECK(!get_entity(g, EntityType::Vehicle, "V9").has_value());
  CHECK(get_entity(g, EntityType::Zone, "Z3").has_value());
}

TEST_CASE("trip surrogate keys follow ftime order within a vehicle day") {
  const auto g = build({rec("V1", "2019-08-01", "12:00:00", "Z1", "Z2"),
                        rec("V1", "2019-08-01", "08:00:00", "Z0", "Z1"),
                        rec("V1", "2019-08-02", "09:00:00", "Z2", "Z0")});
  CHECK(g.find(EntityType::Trip, "V1#2019-08-01#0") != kNoEntity);
  CHECK(g.find(EntityType::Trip, "V1#2019-08-01#1") != kNoEntity);
  CHECK(g.find(EntityType::Trip, "V1#2019-08-02#0") != kNoEntity);
  // seq 0 is the 08:00 trip
  const auto t0 = g.find(EntityType::Trip, "V1#2019-08-01#0");
  CHECK(g.ftime(t0).to_string() == "08:00:00");
}

TEST_CASE("neighbors walks forward and reverse adjacency") {
  const auto records = std::vector<TripRecord>{
      rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7"),
      rec("V1", "2019-08-01", "12:00:00", "Z7", "Z3"),
      rec("V2", "2019-08-01", "13:00:00", "Z3", "Z5"),
  };
  const auto g = build(records);
  const auto trips = neighbors(g, {EntityType::Vehicle, "V1"}, Relation::HasTrip,
                               Direction::Forward);
  CHECK(trips.size() == 2);

  const auto origin = neighbors(g, {EntityType::Trip, "V1#2019-08-01#0"}, Relation::TripOzone,
                                Direction::Forward);
  REQUIRE(origin.size() == 1);
  CHECK(origin[0].key == "Z3");

  // reverse lookup matches a linear scan over the records
  const auto departing = neighbors(g, {EntityType::Zone, "Z3"}, Relation::TripOzone,
                                   Direction::Reverse);
  const auto expected = std::count_if(records.begin(), records.end(),
                                      [](const TripRecord& r) { return r.fzone == "Z3"; });
  CHECK(std::ptrdiff_t(departing.size()) == expected);

  CHECK_THROWS_AS(neighbors(g, {EntityType::Vehicle, "V9"}, Relation::HasTrip,
                            Direction::Forward),
                  std::out_of_range);
}

TEST_CASE("attach_labels adds one TripType per vehicle and relabeling replaces") {
  auto g = build({rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7"),
                  rec("V2", "2019-08-01", "10:30:00", "Z1", "Z2")});
  attach_labels(g, {{"V1", "Commuter"}, {"V2", "PassingVehicle"}});
  CHECK(g.triple_count(Relation::TripType) == 2);
  CHECK(g.entity_count(EntityType::Label) == 2);

  attach_labels(g, {{"V1", "VehicleOfRandom"}});
  CHECK(g.triple_count(Relation::TripType) == 2);  // replaced, not added
  const auto v1 = g.find(EntityType::Vehicle, "V1");
  CHECK(g.key(g.out_one(v1, Relation::TripType)) == "VehicleOfRandom");

  CHECK_THROWS_AS(attach_labels(g, {{"V9", "Commuter"}}), std::out_of_range);
  check_schema(g);
}

TEST_CASE("label subgraph keeps exactly the labeled vehicles and their trips") {
  auto g = build({rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7"),
                  rec("V1", "2019-08-02", "09:30:00", "Z3", "Z7"),
                  rec("V2", "2019-08-01", "10:30:00", "Z1", "Z2")});
  CHECK_THROWS(label_subgraph(g, "Commuter"));  // labels not attached yet

  attach_labels(g, {{"V1", "Commuter"}, {"V2", "Commuter"}});
  const auto all = label_subgraph(g, "Commuter");
  CHECK(all.entity_count() == g.entity_count());
  CHECK(all.triple_count() == g.triple_count());

  attach_labels(g, {{"V2", "PassingVehicle"}});
  const auto commuters = label_subgraph(g, "Commuter");
  CHECK(commuters.entity_count(EntityType::Vehicle) == 1);
  CHECK(commuters.entity_count(EntityType::Trip) == 2);
  const auto nobody = label_subgraph(g, "VehicleOfStable");
  CHECK(nobody.entity_count(EntityType::Trip) == 0);

  // label subgraphs partition the trips
  std::size_t total = 0;
  for (const auto& label :
       {"PassingVehicle", "Commuter", "VehicleOfStable", "VehicleOfRandom",
        "VehicleOfHighFrequency"}) {
    total += label_subgraph(g, label).entity_count(EntityType::Trip);
  }
  CHECK(total == g.entity_count(EntityType::Trip));
}

TEST_CASE("date subgraph filters trips by date") {
  auto g = build({rec("V1", "2019-08-01", "09:30:00", "Z3", "Z7"),
                  rec("V2", "2019-08-01", "10:30:00", "Z1", "Z2")});
  const auto same = date_subgraph(g, *Date::parse("2019-08-01"));
  CHECK(same.entity_count() == g.entity_count());
  CHECK(same.triple_count() == g.triple_count());
  CHECK(date_subgraph(g, *Date::parse("2019-08-09")).entity_count(EntityType::Trip) == 0);

  std::mt19937_64 rng(5);
  const auto records = random_records(rng, 120);
  const auto big = build(records);
  std::size_t total = 0;
  for (const auto d : dates_of(big)) {
    total += date_subgraph(big, d).entity_count(EntityType::Trip);
  }
  CHECK(total == big.entity_count(EntityType::Trip));
}

TEST_CASE("export and reimport preserve entity counts, triples, and adjacency") {
  std::mt19937_64 rng(17);
  const auto records = random_records(rng, 150);
  auto g = build(records);
  attach_labels(g, {{records[0].vehicle, "Commuter"}});

  std::ostringstream triples, props;
  export_triples(g, triples);
  export_properties(g, props);
  std::istringstream tin(triples.str()), pin(props.str());
  const auto back = import_graph(tin, &pin);

  CHECK(back.entity_count() == g.entity_count());
  CHECK(back.triple_count() == g.triple_count());
  for (std::size_t t = 0; t < kEntityTypeCount; ++t) {
    CHECK(back.entity_count(EntityType(t)) == g.entity_count(EntityType(t)));
  }
  check_schema(back);

  // identical adjacency per entity: re-export matches byte for byte
  CHECK(export_string(back) == export_string(g));
}

TEST_CASE("schema checker rejects malformed graphs") {
  TripKG g;
  const auto v = g.intern(EntityType::Vehicle, "V1");
  const auto t = g.intern(EntityType::Trip, "T1");
  CHECK_THROWS_AS(g.add_triple(t, Relation::HasTrip, v), std::logic_error);  // reversed
  g.add_triple(v, Relation::HasTrip, t);
  CHECK_THROWS_AS(check_schema(g), std::logic_error);  // incomplete trip
}
