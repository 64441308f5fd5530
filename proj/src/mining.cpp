#include "tripkg/mining.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "tripkg/csv.hpp"

namespace tripkg::mining {

namespace {

constexpr std::array<std::string_view, 4> kFreqNames = {"ExtremelyLow", "Low", "General", "High"};
constexpr std::array<std::string_view, 3> kConcNames = {"Dispersed", "Concentrated",
                                                        "HighlyConcentrated"};
constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "PassingVehicle", "Commuter", "VehicleOfStable", "VehicleOfRandom", "VehicleOfHighFrequency"};

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string_view to_string(FrequencyClass c) { return kFreqNames[std::size_t(c)]; }
std::string_view to_string(ConcentrationLevel c) { return kConcNames[std::size_t(c)]; }
std::string_view to_string(MobilityLabel l) { return kLabelNames[std::size_t(l)]; }

std::optional<FrequencyClass> frequency_class_from(std::string_view s) {
  for (std::size_t i = 0; i < kFreqNames.size(); ++i)
    if (kFreqNames[i] == s) return FrequencyClass(i);
  return std::nullopt;
}

std::optional<ConcentrationLevel> concentration_from(std::string_view s) {
  for (std::size_t i = 0; i < kConcNames.size(); ++i)
    if (kConcNames[i] == s) return ConcentrationLevel(i);
  return std::nullopt;
}

std::optional<MobilityLabel> label_from(std::string_view s) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == s) return MobilityLabel(i);
  return std::nullopt;
}

FrequencyClass classify_frequency(double trips_per_day, const MiningConfig& cfg) {
  if (trips_per_day <= cfg.freq_t1) return FrequencyClass::ExtremelyLow;
  if (trips_per_day <= cfg.freq_t2) return FrequencyClass::Low;
  if (trips_per_day < cfg.freq_t3) return FrequencyClass::General;
  return FrequencyClass::High;
}

FrequencyClass trip_frequency(const kg::TripKG& g, std::string_view vehicle, int day_count,
                              const MiningConfig& cfg) {
  if (day_count < 1) throw std::invalid_argument("trip_frequency: day_count must be >= 1");
  const auto v = g.find(kg::EntityType::Vehicle, vehicle);
  if (v == kg::kNoEntity)
    throw std::out_of_range("trip_frequency: unknown vehicle '" + std::string{vehicle} + "'");
  const double freq = double(g.out(v, kg::Relation::HasTrip).size()) / double(day_count);
  return classify_frequency(freq, cfg);
}

ConcentrationLevel concentration(std::span<const std::int64_t> counts) {
  std::vector<std::int64_t> used;
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("concentration: negative count");
    if (c > 0) {
      used.push_back(c);
      total += c;
    }
  }
  if (used.empty()) throw std::invalid_argument("concentration: all counts are zero");
  std::sort(used.begin(), used.end(), std::greater<>{});

  const std::size_t n = used.size();
  // round-half-up of 0.2n and 0.3n, clamped to >= 1
  const std::size_t k1 = std::max<std::size_t>(1, (2 * n + 5) / 10);
  const std::size_t k2 = std::max<std::size_t>(1, (3 * n + 5) / 10);

  std::int64_t top1 = 0;
  for (std::size_t i = 0; i < std::min(k1, n); ++i) top1 += used[i];
  if (5 * top1 >= 4 * total) return ConcentrationLevel::HighlyConcentrated;

  std::int64_t top2 = 0;
  for (std::size_t i = 0; i < std::min(k2, n); ++i) top2 += used[i];
  if (10 * top2 >= 7 * total) return ConcentrationLevel::Concentrated;
  return ConcentrationLevel::Dispersed;
}

double association_score(const std::vector<std::vector<std::int64_t>>& p, double rho,
                         AssociationFormula formula) {
  if (p.empty()) throw std::invalid_argument("association_score: empty matrix");
  double numer = 0;
  double total = 0;
  for (const auto& row : p) {
    std::int64_t rowsum = 0;
    std::int64_t rowmax = 0;
    std::int64_t used_zones = 0;
    for (auto c : row) {
      if (c < 0) throw std::invalid_argument("association_score: negative count");
      rowsum += c;
      rowmax = std::max(rowmax, c);
      if (c > 0) ++used_zones;
    }
    if (rowsum == 0) continue;
    const double q = std::max(1.0, rho * double(rowsum));
    const double boost = 1.0 + std::max(0.0, q - double(used_zones)) / q;
    const double term = formula == AssociationFormula::Capped
                            ? std::min(double(rowsum), boost * double(rowmax))
                            : std::min(1.0, boost * double(rowmax));
    numer += term;
    total += double(rowsum);
  }
  if (total == 0) throw std::invalid_argument("association_score: no positive entries");
  return 100.0 * numer / total;
}

MobilityLabel assign_label(FrequencyClass freq, int s_d, double s_am, const MiningConfig& cfg) {
  if (freq == FrequencyClass::ExtremelyLow) return MobilityLabel::PassingVehicle;
  if (freq == FrequencyClass::High) return MobilityLabel::VehicleOfHighFrequency;
  const bool associated = s_am >= cfg.theta_am;
  const bool concentrated = s_d >= cfg.theta_d;
  if (associated && concentrated) return MobilityLabel::Commuter;
  if (associated != concentrated) return MobilityLabel::VehicleOfStable;
  return MobilityLabel::VehicleOfRandom;
}

int resolve_window_days(const kg::TripKG& g, const MiningConfig& cfg) {
  if (cfg.window_days > 0) return cfg.window_days;
  const auto dates = kg::dates_of(g);
  if (dates.empty()) return 1;
  return dates.back().days - dates.front().days + 1;
}

std::vector<MobilityProfile> mine_all(const kg::TripKG& g, const MiningConfig& cfg,
                                      int day_count) {
  if (day_count <= 0) day_count = resolve_window_days(g, cfg);

  std::vector<MobilityProfile> profiles;
  for (const auto vehicle : g.entities(kg::EntityType::Vehicle)) {
    const auto trips = g.out(vehicle, kg::Relation::HasTrip);

    std::map<std::string_view, std::int64_t> span_counts, origin_counts, dest_counts;
    // the three association items: span x origin, span x destination,
    // origin x destination
    std::map<std::string_view, std::map<std::string_view, std::int64_t>> ot, dt, od;
    for (const auto trip : trips) {
      const auto span = std::string_view{g.key(g.out_one(trip, kg::Relation::TripTimeSpan))};
      const auto ozone = std::string_view{g.key(g.out_one(trip, kg::Relation::TripOzone))};
      const auto dzone = std::string_view{g.key(g.out_one(trip, kg::Relation::TripDzone))};
      ++span_counts[span];
      ++origin_counts[ozone];
      ++dest_counts[dzone];
      ++ot[span][ozone];
      ++dt[span][dzone];
      ++od[ozone][dzone];
    }

    const auto to_counts = [](const auto& m) {
      std::vector<std::int64_t> out;
      out.reserve(m.size());
      for (const auto& [k, v] : m) out.push_back(v);
      return out;
    };
    const auto to_matrix = [&](const auto& rows) {
      std::vector<std::vector<std::int64_t>> out;
      out.reserve(rows.size());
      for (const auto& [r, cols] : rows) out.push_back(to_counts(cols));
      return out;
    };

    MobilityProfile prof;
    prof.vehicle = g.key(vehicle);
    prof.freq = classify_frequency(double(trips.size()) / double(day_count), cfg);
    prof.time_conc = concentration(to_counts(span_counts));
    prof.origin_conc = concentration(to_counts(origin_counts));
    prof.dest_conc = concentration(to_counts(dest_counts));
    prof.s_d = int(prof.time_conc) + int(prof.origin_conc) + int(prof.dest_conc);
    prof.score_ot = association_score(to_matrix(ot), cfg.rho, cfg.formula);
    prof.score_dt = association_score(to_matrix(dt), cfg.rho, cfg.formula);
    prof.score_od = association_score(to_matrix(od), cfg.rho, cfg.formula);
    prof.s_am = (prof.score_ot + prof.score_dt + prof.score_od) / 3.0;
    prof.label = assign_label(prof.freq, prof.s_d, prof.s_am, cfg);
    profiles.push_back(std::move(prof));
  }
  std::sort(profiles.begin(), profiles.end(), [](const MobilityProfile& a, const MobilityProfile& b) {
    return a.vehicle < b.vehicle;
  });
  return profiles;
}

std::vector<std::pair<std::string, std::string>> label_pairs(
    std::span<const MobilityProfile> profiles) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.emplace_back(p.vehicle, std::string{to_string(p.label)});
  return out;
}

void write_profiles(std::ostream& out, std::span<const MobilityProfile> profiles) {
  out << "vehicle,freq_class,time_conc,origin_conc,dest_conc,S_d,score_ot,score_dt,score_od,"
         "S_am,label\n";
  for (const auto& p : profiles) {
    csv::write_row(out,
                   {p.vehicle, std::string{to_string(p.freq)}, std::string{to_string(p.time_conc)},
                    std::string{to_string(p.origin_conc)}, std::string{to_string(p.dest_conc)},
                    std::to_string(p.s_d), format_score(p.score_ot), format_score(p.score_dt),
                    format_score(p.score_od), format_score(p.s_am),
                    std::string{to_string(p.label)}});
  }
}

std::vector<MobilityProfile> read_profiles(std::istream& in) {
  std::string line;
  if (!csv::getline(in, line)) throw std::runtime_error("profiles: missing header");
  std::vector<MobilityProfile> out;
  std::size_t lineno = 1;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 11)
      throw std::runtime_error("profiles line " + std::to_string(lineno) + ": expected 11 fields");
    MobilityProfile p;
    p.vehicle = f[0];
    const auto freq = frequency_class_from(f[1]);
    const auto tc = concentration_from(f[2]);
    const auto oc = concentration_from(f[3]);
    const auto dc = concentration_from(f[4]);
    const auto label = label_from(f[10]);
    if (!freq || !tc || !oc || !dc || !label)
      throw std::runtime_error("profiles line " + std::to_string(lineno) + ": bad enum value");
    p.freq = *freq;
    p.time_conc = *tc;
    p.origin_conc = *oc;
    p.dest_conc = *dc;
    p.s_d = std::stoi(f[5]);
    p.score_ot = std::stod(f[6]);
    p.score_dt = std::stod(f[7]);
    p.score_od = std::stod(f[8]);
    p.s_am = std::stod(f[9]);
    p.label = *label;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tripkg::mining
