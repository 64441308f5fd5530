#include "tripkg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "tripkg/csv.hpp"
#include "tripkg/mining.hpp"
#include "tripkg/rng.hpp"

namespace tripkg::synth {

namespace {

std::string zone_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "Z%02d", i + 1);
  return buf;
}

std::string vehicle_name(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%04d", prefix, i + 1);
  return buf;
}

struct ZoneDraw {
  std::vector<std::string> names;
  AliasSampler sampler;

  ZoneDraw(std::vector<std::string> zones, double skew)
      : names(std::move(zones)), sampler(make_weights(names.size(), skew)) {}

  static std::vector<double> make_weights(std::size_t n, double skew) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(double(i + 1), skew);
    return w;
  }
  const std::string& draw(std::mt19937_64& rng) const { return names[sampler.sample(rng)]; }
};

TimeOfDay random_time_in(const TimeSpan& span, std::mt19937_64& rng) {
  const auto width = std::size_t(span.end - span.begin);
  return TimeOfDay{span.begin + std::int32_t(uniform_index(rng, width))};
}

}  // namespace

Corpus make_corpus(const PipelineConfig& cfg, std::uint64_t seed) {
  const auto& sc = cfg.synth;
  cfg.spans.validate();

  std::vector<Date> all_dates, workdays;
  for (int i = 0; i < sc.days; ++i) {
    const Date d{sc.start.days + i};
    all_dates.push_back(d);
    if (map_week(d, cfg.calendar) == DayKind::Workday) workdays.push_back(d);
  }

  // span roles: the commute peaks are the spans containing 08:00 and 17:30
  const auto morning_span = cfg.spans.index_of(*TimeOfDay::parse("08:00:00"));
  const auto evening_span = cfg.spans.index_of(*TimeOfDay::parse("17:30:00"));
  if (morning_span == evening_span)
    throw std::invalid_argument("synth: span configuration has no distinct commute peaks");

  std::vector<std::string> zones;
  for (int i = 0; i < sc.zones; ++i) zones.push_back(zone_name(i));
  const int n_work = std::max(2, sc.zones / 6);
  const int n_home = std::max(2, (sc.zones * 2) / 5);
  std::vector<std::string> work_zones(zones.begin(), zones.begin() + n_work);
  std::vector<std::string> home_zones(zones.begin() + n_work, zones.begin() + n_work + n_home);
  // the non-commute cohorts move between a handful of busy activity hubs;
  // concentrated endpoints keep their chains repairable when destinations
  // are re-sampled
  const auto n_hubs = std::min<std::size_t>(6, zones.size());
  std::vector<std::string> hub_zones(zones.end() - std::ptrdiff_t(n_hubs), zones.end());
  const ZoneDraw hub_zone{hub_zones, 1.0};

  std::mt19937_64 rng(stream_seed(seed, 0x5eed));
  Corpus corpus;

  // --- commuters -----------------------------------------------------
  if (sc.commuters > 0) {
    if (workdays.empty()) throw std::invalid_argument("synth: no workdays in the window");
    const int e_needed = std::max<int>(
        1, int(std::ceil(0.8 * double(sc.days) - double(workdays.size()))));
    if (4 * e_needed > int(workdays.size()))
      throw std::invalid_argument(
          "synth: commuter cohort infeasible: too few workdays to stay above 0.8 trips/day "
          "with a concentrated span profile");
    // all commuters head for one CBD zone; homes differ per group, so the
    // association clique is stable while OD patterns stay varied
    const auto& work = work_zones[0];
    for (int i = 0; i < sc.commuters; ++i) {
      const auto id = vehicle_name('C', i);
      corpus.truth.emplace_back(id, "Commuter");
      const int group = i / 10;
      const auto& home = home_zones[std::size_t(group) % home_zones.size()];

      std::vector<std::size_t> evening_days(workdays.size());
      std::iota(evening_days.begin(), evening_days.end(), 0);
      for (std::size_t j = evening_days.size(); j > 1; --j)
        std::swap(evening_days[j - 1], evening_days[uniform_index(rng, j)]);
      evening_days.resize(std::size_t(e_needed));

      for (std::size_t wi = 0; wi < workdays.size(); ++wi) {
        const auto d = workdays[wi];
        corpus.records.push_back(
            {id, d, random_time_in(cfg.spans.spans[morning_span], rng), home, work});
        if (std::find(evening_days.begin(), evening_days.end(), wi) != evening_days.end()) {
          // evening return, always threaded from the workplace
          corpus.records.push_back(
              {id, d, random_time_in(cfg.spans.spans[evening_span], rng), work, home});
        }
      }
    }
  }

  // --- passing vehicles ----------------------------------------------
  // daytime spans keep the passing cohort's hyper-edges dense enough to
  // carry a stable association profile
  const auto daytime_span = [&](std::mt19937_64& r) -> const TimeSpan& {
    if (cfg.spans.size() < 5) return cfg.spans.spans[uniform_index(r, cfg.spans.size())];
    return cfg.spans.spans[1 + uniform_index(r, 3)];
  };
  if (sc.passing > 0) {
    const int max_trips = int(0.16 * double(sc.days));
    if (max_trips < 1)
      throw std::invalid_argument("synth: passing cohort infeasible: window shorter than 7 days");
    // gateway corridors shared by the cohort
    const int gateways = std::min(4, sc.zones);
    for (int i = 0; i < sc.passing; ++i) {
      const auto id = vehicle_name('P', i);
      corpus.truth.emplace_back(id, "PassingVehicle");
      const int trips = 1 + int(uniform_index(rng, std::size_t(max_trips)));
      std::vector<std::size_t> days(all_dates.size());
      std::iota(days.begin(), days.end(), 0);
      for (std::size_t j = days.size(); j > 1; --j)
        std::swap(days[j - 1], days[uniform_index(rng, j)]);
      for (int t = 0; t < trips; ++t) {
        const auto d = all_dates[days[std::size_t(t)]];  // distinct days: no chains
        const int corridor = int(uniform_index(rng, std::size_t(gateways)));
        const auto& from = zones[std::size_t(corridor)];
        const auto& to = zones[std::size_t((corridor + gateways / 2) % gateways)];
        corpus.records.push_back({id, d, random_time_in(daytime_span(rng), rng), from, to});
      }
    }
  }

  // chained day: sample (span, time) pairs, order them by clock time, then
  // thread origins through the ordered sequence; breaks jump to another
  // hub, and optionally a share of trips are short in-hub hops
  const auto emit_chained_day = [&](const std::string& id, Date d, std::vector<TimeOfDay> times,
                                    double loop_share) {
    std::sort(times.begin(), times.end());
    std::string position = hub_zone.draw(rng);
    for (std::size_t t = 0; t < times.size(); ++t) {
      const bool threaded = t > 0 && canonical(rng) < sc.continuity;
      const std::string origin = threaded ? position : hub_zone.draw(rng);
      std::string dest = threaded && canonical(rng) < loop_share ? origin : hub_zone.draw(rng);
      corpus.records.push_back({id, d, times[t], origin, dest});
      position = std::move(dest);
    }
  };

  // --- high frequency -------------------------------------------------
  for (int i = 0; i < sc.high_freq; ++i) {
    const auto id = vehicle_name('H', i);
    corpus.truth.emplace_back(id, "VehicleOfHighFrequency");
    for (const auto d : all_dates) {
      std::vector<TimeOfDay> times;
      for (int t = 0; t < 7; ++t) {
        const auto& span = cfg.spans.spans[uniform_index(rng, cfg.spans.size())];
        times.push_back(random_time_in(span, rng));
      }
      emit_chained_day(id, d, std::move(times), 0.5);
    }
  }

  // --- random vehicles -------------------------------------------------
  for (int i = 0; i < sc.randoms; ++i) {
    const auto id = vehicle_name('R', i);
    corpus.truth.emplace_back(id, "VehicleOfRandom");
    for (const auto d : all_dates) {
      std::vector<TimeOfDay> times;
      for (int t = 0; t < 3; ++t) {
        const auto& span = cfg.spans.spans[uniform_index(rng, cfg.spans.size())];
        times.push_back(random_time_in(span, rng));
      }
      emit_chained_day(id, d, std::move(times), 0.0);
    }
  }

  // stable global order: by vehicle, date, time
  std::stable_sort(corpus.records.begin(), corpus.records.end(),
                   [](const ingest::TripRecord& a, const ingest::TripRecord& b) {
                     if (a.vehicle != b.vehicle) return a.vehicle < b.vehicle;
                     if (a.date != b.date) return a.date < b.date;
                     return a.ftime < b.ftime;
                   });
  return corpus;
}

void write_truth(std::ostream& out, const Corpus& corpus) {
  out << "vehicle,label\n";
  for (const auto& [vehicle, label] : corpus.truth) {
    csv::write_row(out, {vehicle, label});
  }
}

std::vector<std::pair<std::string, std::string>> read_truth(std::istream& in) {
  std::string line;
  if (!csv::getline(in, line)) throw std::runtime_error("truth file: missing header");
  std::vector<std::pair<std::string, std::string>> out;
  while (csv::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 2) throw std::runtime_error("truth file: expected 'vehicle,label'");
    out.emplace_back(f[0], f[1]);
  }
  return out;
}

}  // namespace tripkg::synth
