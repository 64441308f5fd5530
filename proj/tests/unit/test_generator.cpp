#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "tripkg/generator.hpp"
#include "tripkg/graph.hpp"
#include "tripkg/rng.hpp"

using namespace tripkg;
using namespace tripkg::gen;

namespace {

ingest::TripRecord rec(std::string vehicle, std::string date, std::string ftime, std::string fz,
                       std::string tz) {
  return {std::move(vehicle), *Date::parse(date), *TimeOfDay::parse(ftime), std::move(fz),
          std::move(tz)};
}

kg::TripKG build(const std::vector<ingest::TripRecord>& records) {
  return kg::build_graph(records, CalendarConfig::defaults(), TimeSpanConfig::defaults());
}

cgraph::PatternDistribution make_f(
    std::vector<std::tuple<std::string, std::string, std::string, std::int64_t>> rows) {
  cgraph::PatternDistribution f;
  for (auto& [s, o, d, c] : rows) {
    f.total += c;
    f.patterns.push_back({std::move(s), std::move(o), std::move(d), c});
  }
  return f;
}

std::string export_string(const kg::TripKG& g) {
  std::ostringstream t, p;
  kg::export_triples(g, t);
  kg::export_properties(g, p);
  return t.str() + "\x1e" + p.str();
}

}  // namespace

TEST_CASE("unit graph sampling: degenerate, empty, and frequency checks") {
  std::mt19937_64 rng(7);
  const auto single = make_f({{"MorningPeak", "Z1", "Z2", 4}});
  const auto five = generate_unit_graphs(single, 5, rng);
  REQUIRE(five.size() == 5);
  for (const auto& u : five) {
    CHECK(u == TripUnitGraph{"MorningPeak", "Z1", "Z2"});
  }

  CHECK(generate_unit_graphs(single, 0, rng).empty());
  CHECK_THROWS_AS(generate_unit_graphs(cgraph::PatternDistribution{}, 3, rng),
                  std::invalid_argument);

  // 75/25 split at n = 10000 stays within the 99% binomial interval
  const auto mixed = make_f({{"MorningPeak", "Z1", "Z2", 75}, {"Midday", "Z3", "Z4", 25}});
  const auto sample = generate_unit_graphs(mixed, 10000, rng);
  const auto first = std::count_if(sample.begin(), sample.end(),
                                   [](const TripUnitGraph& u) { return u.ozone == "Z1"; });
  CHECK(double(first) / 10000.0 > 0.73);
  CHECK(double(first) / 10000.0 < 0.77);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  const auto f = make_f({{"MorningPeak", "Z1", "Z2", 3}, {"Midday", "Z2", "Z3", 1}});
  std::mt19937_64 a(42), b(42), c(43);
  const auto ua = generate_unit_graphs(f, 100, a);
  const auto ub = generate_unit_graphs(f, 100, b);
  const auto uc = generate_unit_graphs(f, 100, c);
  CHECK(ua == ub);
  CHECK(ua != uc);
}

TEST_CASE("single active span with one pool unit yields a single candidate") {
  const auto spans = TimeSpanConfig::defaults();
  std::vector<std::vector<TripUnitGraph>> pool(spans.size());
  pool[1] = {{"MorningPeak", "Z1", "Z2"}};
  std::mt19937_64 rng(5);
  const auto candidates =
      candidate_combinations({0, 1, 0, 0, 0}, std::nullopt, pool,
                             make_f({{"MorningPeak", "Z1", "Z2", 1}}), 8, rng, spans);
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].units.size() == 1);
  CHECK(candidates[0].units[0].unit == TripUnitGraph{"MorningPeak", "Z1", "Z2"});
  CHECK(candidates[0].continuity_score == 0);  // unknown position scores nothing
}

TEST_CASE("the best two-span combination threads through the position") {
  const auto spans = TimeSpanConfig::defaults();
  std::vector<std::vector<TripUnitGraph>> pool(spans.size());
  pool[1] = {{"MorningPeak", "Z1", "Z2"}, {"MorningPeak", "Z3", "Z4"}};
  pool[3] = {{"EveningPeak", "Z2", "Z5"}};
  std::mt19937_64 rng(5);
  const auto candidates = candidate_combinations(
      {0, 1, 0, 1, 0}, std::string{"Z1"}, pool, make_f({{"MorningPeak", "Z1", "Z2", 1}}), 8, rng,
      spans);
  REQUIRE(!candidates.empty());
  CHECK(candidates[0].continuity_score == 2);
  CHECK(candidates[0].units[0].unit == TripUnitGraph{"MorningPeak", "Z1", "Z2"});
  CHECK(candidates[0].units[1].unit == TripUnitGraph{"EveningPeak", "Z2", "Z5"});
  // lower-score alternatives never precede higher ones
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    CHECK(candidates[i - 1].continuity_score >= candidates[i].continuity_score);
  }
}

TEST_CASE("k = 1 still reaches the exhaustive-search optimum") {
  const auto spans = TimeSpanConfig::defaults();
  std::mt19937_64 rng(11);
  std::mt19937_64 data_rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::vector<TripUnitGraph>> pool(spans.size());
    std::vector<std::uint8_t> active(spans.size(), 0);
    const int n_active = 1 + int(uniform_index(data_rng, 3));
    std::set<std::size_t> chosen;
    while (int(chosen.size()) < n_active) chosen.insert(uniform_index(data_rng, spans.size()));
    for (const auto s : chosen) {
      active[s] = 1;
      const int units = 1 + int(uniform_index(data_rng, 3));
      for (int u = 0; u < units; ++u) {
        pool[s].push_back({spans.spans[s].name, "Z" + std::to_string(uniform_index(data_rng, 4)),
                           "Z" + std::to_string(uniform_index(data_rng, 4))});
      }
    }
    const std::optional<std::string> position = "Z" + std::to_string(uniform_index(data_rng, 4));

    // exhaustive maximum over the cartesian product
    std::vector<std::size_t> active_list(chosen.begin(), chosen.end());
    int best = -1;
    std::vector<std::size_t> pick(active_list.size(), 0);
    while (true) {
      int score = 0;
      std::string pos = *position;
      for (std::size_t i = 0; i < active_list.size(); ++i) {
        const auto& u = pool[active_list[i]][pick[i]];
        if (u.ozone == pos) ++score;
        pos = u.dzone;
      }
      best = std::max(best, score);
      std::size_t i = 0;
      for (; i < pick.size(); ++i) {
        if (++pick[i] < pool[active_list[i]].size()) break;
        pick[i] = 0;
      }
      if (i == pick.size()) break;
    }

    const auto candidates = candidate_combinations(
        active, position, pool, make_f({{spans.spans[0].name, "Z0", "Z0", 1}}), 1, rng, spans);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].continuity_score == best);
  }
}

TEST_CASE("an empty pool group falls back to the span-conditioned distribution") {
  const auto spans = TimeSpanConfig::defaults();
  std::vector<std::vector<TripUnitGraph>> pool(spans.size());
  std::mt19937_64 rng(5);
  const auto f = make_f({{"MorningPeak", "Z7", "Z8", 2}, {"Midday", "Z1", "Z1", 5}});
  const auto candidates =
      candidate_combinations({0, 1, 0, 0, 0}, std::nullopt, pool, f, 4, rng, spans);
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].units[0].unit == TripUnitGraph{"MorningPeak", "Z7", "Z8"});
  CHECK(!candidates[0].units[0].from_pool);

  // no pattern for the active span at all: error
  const auto wrong_span = make_f({{"Midday", "Z1", "Z1", 5}});
  CHECK_THROWS_AS(
      candidate_combinations({0, 1, 0, 0, 0}, std::nullopt, pool, wrong_span, 4, rng, spans),
      std::runtime_error);
}

TEST_CASE("select_optimal returns a single candidate unchanged") {
  const auto original = build({rec("V1", "2019-08-01", "08:00:00", "Z1", "Z2")});
  const kg::TripKG generated = build({});
  std::vector<CandidateCombination> candidates(1);
  candidates[0].units = {{{"MorningPeak", "Z1", "Z2"}, true}};
  const auto cfg = PipelineConfig::defaults();
  CHECK(select_optimal(original, generated, "V1", *Date::parse("2019-08-01"), candidates, 1e-3,
                       cfg) == 0);
}

TEST_CASE("select_optimal prefers the candidate reproducing the level-1 association") {
  // Original: A and B share (MorningPeak, origin Z1): one hyper-edge, C is
  // linked to B at midday. Generated so far: A' and B' (same ids) with the
  // same morning pattern. For C the edge-creating candidate reproduces the
  // original mean vector exactly; the isolated one does not.
  const auto original = build({
      rec("A", "2019-08-01", "08:00:00", "Z1", "Z2"),
      rec("B", "2019-08-01", "08:10:00", "Z1", "Z3"),
      rec("C", "2019-08-01", "12:10:00", "Z5", "Z6"),
      rec("B", "2019-08-01", "12:00:00", "Z5", "Z7"),
  });
  const auto generated = build({
      rec("A", "2019-08-01", "07:30:00", "Z1", "Z2"),
      rec("B", "2019-08-01", "07:40:00", "Z1", "Z3"),
      rec("B", "2019-08-01", "12:00:00", "Z5", "Z7"),
  });
  std::vector<CandidateCombination> candidates(2);
  candidates[0].units = {{{"Midday", "Z8", "Z9"}, true}};   // stays isolated
  candidates[1].units = {{{"Midday", "Z5", "Z9"}, true}};   // links to B via origin Z5
  const auto cfg = PipelineConfig::defaults();
  const auto chosen =
      select_optimal(original, generated, "C", *Date::parse("2019-08-01"), candidates, 1e-9, cfg);
  CHECK(chosen == 1);
}

TEST_CASE("generate_label on a fully forced corpus reproduces the original shape") {
  // one vehicle, one trip per day, single pattern
  auto g = build({rec("V1", "2019-08-01", "08:00:00", "Z1", "Z2"),
                  rec("V1", "2019-08-02", "08:10:00", "Z1", "Z2")});
  auto cfg = PipelineConfig::defaults();
  cfg.seed = 9;
  const auto result = generate_label(g, "Commuter", cfg, 77);
  REQUIRE(result.records.size() == 2);
  for (const auto& r : result.records) {
    CHECK(r.fzone == "Z1");
    CHECK(r.tzone == "Z2");
    CHECK(r.vehicle != "V1");
  }
  CHECK(result.records[0].date == *Date::parse("2019-08-01"));
  CHECK(result.records[1].date == *Date::parse("2019-08-02"));
  REQUIRE(result.reports.size() == 2);
  CHECK(result.reports[0].trips == 1);
  CHECK(result.reports[0].sampled == 1);
  CHECK(result.reports[0].fallback == 0);
}

TEST_CASE("generation conserves per-date and per-span trip counts") {
  std::mt19937_64 data_rng(19);
  std::vector<ingest::TripRecord> records;
  for (int v = 0; v < 12; ++v) {
    for (int d = 0; d < 5; ++d) {
      const int trips = 1 + int(uniform_index(data_rng, 3));
      for (int t = 0; t < trips; ++t) {
        records.push_back(rec("V" + std::to_string(v),
                              Date{Date::parse("2019-08-01")->days + d}.to_string(),
                              TimeOfDay{std::int32_t(uniform_index(data_rng, kSecondsPerDay))}
                                  .to_string(),
                              "Z" + std::to_string(uniform_index(data_rng, 6)),
                              "Z" + std::to_string(uniform_index(data_rng, 6))));
      }
    }
  }
  auto g = build(records);
  std::vector<std::pair<std::string, std::string>> labels;
  for (int v = 0; v < 12; ++v) labels.emplace_back("V" + std::to_string(v), "VehicleOfRandom");
  kg::attach_labels(g, labels);

  auto cfg = PipelineConfig::defaults();
  cfg.seed = 4242;
  const auto result = generate_all(g, cfg);
  const auto gen = generated_graph(result, cfg);
  kg::check_schema(gen);

  CHECK(gen.entity_count(kg::EntityType::Trip) == g.entity_count(kg::EntityType::Trip));
  CHECK(gen.entity_count(kg::EntityType::Vehicle) == g.entity_count(kg::EntityType::Vehicle));

  for (const auto d : kg::dates_of(g)) {
    const auto orig_day = kg::date_subgraph(g, d);
    const auto gen_day = kg::date_subgraph(gen, d);
    CHECK(orig_day.entity_count(kg::EntityType::Trip) ==
          gen_day.entity_count(kg::EntityType::Trip));
    // span histograms match exactly
    for (const auto& span : cfg.spans.spans) {
      const auto count_span = [&](const kg::TripKG& sub) {
        const auto id = sub.find(kg::EntityType::TimeSpan, span.name);
        return id == kg::kNoEntity ? std::size_t(0) : sub.in(id, kg::Relation::TripTimeSpan).size();
      };
      CHECK(count_span(orig_day) == count_span(gen_day));
    }
  }

  // pool conservation per date: samples = consumed + discarded
  for (const auto& rep : result.reports) {
    CHECK(rep.sampled == rep.consumed + rep.discarded);
    CHECK(rep.trips == rep.sampled);
    CHECK(rep.consumed + rep.fallback == rep.trips);
  }
}

TEST_CASE("every generated day keeps the original temporal combination") {
  std::mt19937_64 data_rng(77);
  std::vector<ingest::TripRecord> records;
  for (int v = 0; v < 8; ++v) {
    for (int d = 0; d < 4; ++d) {
      const int trips = 1 + int(uniform_index(data_rng, 4));
      for (int t = 0; t < trips; ++t) {
        records.push_back(rec("V" + std::to_string(v),
                              Date{Date::parse("2019-08-01")->days + d}.to_string(),
                              TimeOfDay{std::int32_t(uniform_index(data_rng, kSecondsPerDay))}
                                  .to_string(),
                              "Z" + std::to_string(uniform_index(data_rng, 5)),
                              "Z" + std::to_string(uniform_index(data_rng, 5))));
      }
    }
  }
  auto g = build(records);
  std::vector<std::pair<std::string, std::string>> labels;
  for (int v = 0; v < 8; ++v) labels.emplace_back("V" + std::to_string(v), "Commuter");
  kg::attach_labels(g, labels);

  auto cfg = PipelineConfig::defaults();
  cfg.seed = 321;
  const auto result = generate_all(g, cfg);
  const auto gen = generated_graph(result, cfg);

  std::map<std::string, std::string> pseudo_of(result.mapping.begin(), result.mapping.end());
  for (int v = 0; v < 8; ++v) {
    const auto orig_id = "V" + std::to_string(v);
    REQUIRE(pseudo_of.contains(orig_id));
    for (const auto d : kg::dates_of(g)) {
      const auto expect = cgraph::temporal_vector(g, orig_id, d, cfg.spans);
      const auto got = cgraph::temporal_vector(gen, pseudo_of.at(orig_id), d, cfg.spans);
      CHECK(expect == got);
    }
  }
}

TEST_CASE("generation is deterministic and pseudonymizes the roster") {
  std::mt19937_64 data_rng(5);
  std::vector<ingest::TripRecord> records;
  for (int v = 0; v < 10; ++v) {
    for (int d = 0; d < 3; ++d) {
      records.push_back(rec("V" + std::to_string(v),
                            Date{Date::parse("2019-08-01")->days + d}.to_string(),
                            TimeOfDay{std::int32_t(uniform_index(data_rng, kSecondsPerDay))}
                                .to_string(),
                            "Z" + std::to_string(uniform_index(data_rng, 5)),
                            "Z" + std::to_string(uniform_index(data_rng, 5))));
    }
  }
  auto g = build(records);
  std::vector<std::pair<std::string, std::string>> labels;
  for (int v = 0; v < 10; ++v) {
    labels.emplace_back("V" + std::to_string(v), v % 2 ? "Commuter" : "VehicleOfRandom");
  }
  kg::attach_labels(g, labels);

  auto cfg = PipelineConfig::defaults();
  cfg.seed = 777;
  const auto r1 = generate_all(g, cfg);
  const auto r2 = generate_all(g, cfg);
  CHECK(export_string(generated_graph(r1, cfg)) == export_string(generated_graph(r2, cfg)));

  auto cfg2 = cfg;
  cfg2.seed = 778;
  const auto r3 = generate_all(g, cfg2);
  CHECK(export_string(generated_graph(r1, cfg)) != export_string(generated_graph(r3, cfg2)));

  // no generated id collides with the input id space; roster is preserved
  std::set<std::string> original_ids;
  for (const auto v : g.entities(kg::EntityType::Vehicle)) original_ids.insert(g.key(v));
  CHECK(r1.mapping.size() == original_ids.size());
  for (const auto& [orig, pseudo] : r1.mapping) {
    CHECK(!original_ids.contains(pseudo));
  }

  CHECK_THROWS_AS(generate_all(g, PipelineConfig::defaults()), std::invalid_argument);  // no seed
}

TEST_CASE("empty label subgraphs contribute nothing") {
  auto g = build({rec("V1", "2019-08-01", "08:00:00", "Z1", "Z2")});
  kg::attach_labels(g, {{"V1", "Commuter"}});
  auto cfg = PipelineConfig::defaults();
  cfg.seed = 1;
  const auto result = generate_all(g, cfg);
  CHECK(result.records.size() == 1);
  CHECK(result.labels.size() == 1);
  CHECK(result.labels[0].second == "Commuter");
}

TEST_CASE("reports serialize as JSON lines") {
  DateReport rep;
  rep.label = "Commuter";
  rep.date = *Date::parse("2019-08-01");
  rep.sampled = 10;
  rep.trips = 10;
  std::ostringstream out;
  write_report(out, std::vector<DateReport>{rep});
  CHECK(out.str().find("\"label\":\"Commuter\"") != std::string::npos);
  CHECK(out.str().find("\"date\":\"2019-08-01\"") != std::string::npos);
}
