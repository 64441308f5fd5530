#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tripkg/datetime.hpp"

namespace tripkg {

enum class DayKind { Workday, Holiday };

std::string_view to_string(DayKind k);

/// Day partition used for the TimeSpan entities. Spans are chronological,
/// non-overlapping, and jointly cover 00:00:00-24:00:00; their file order
/// fixes the dimension order of every span vector downstream.
struct TimeSpan {
  std::string name;
  std::int32_t begin;  // inclusive, seconds of day
  std::int32_t end;    // exclusive, may be 86400
};

struct TimeSpanConfig {
  std::vector<TimeSpan> spans;

  static TimeSpanConfig defaults();
  void validate() const;  // throws std::invalid_argument on gaps/overlaps

  std::size_t size() const { return spans.size(); }
  std::size_t index_of(TimeOfDay t) const;
  const std::string& name_of(TimeOfDay t) const { return spans[index_of(t)].name; }
  std::optional<std::size_t> index_by_name(std::string_view name) const;
};

struct CalendarConfig {
  std::set<Date> holiday_dates;                // override the weekday rule
  std::array<DayKind, 7> weekday_rule{};       // indexed 0=Sun .. 6=Sat

  static CalendarConfig defaults();  // Sat/Sun -> holiday
};

DayKind map_week(Date d, const CalendarConfig& cal);
const std::string& map_timespan(TimeOfDay t, const TimeSpanConfig& cfg);

enum class AssociationFormula { Capped, Literal };
enum class AssociationMatch { SameTrip, SameDay };

struct MiningConfig {
  double freq_t1 = 0.16;  // trips/day, <= t1 -> extremely low
  double freq_t2 = 1.5;   // (t1, t2] -> low
  double freq_t3 = 6.7;   // >= t3 -> high
  double theta_am = 60.0;
  int theta_d = 4;
  double rho = 0.25;
  AssociationFormula formula = AssociationFormula::Capped;
  AssociationMatch match = AssociationMatch::SameTrip;
  int window_days = 0;  // 0: derive from the corpus date range
};

struct GenerationConfig {
  int beam_width = 8;                 // K, max candidate combinations
  double early_exit_epsilon = 1e-3;   // deviation threshold for early exit
  int association_depth = 3;          // N association levels
  bool keep_mapping = false;
};

struct EvalConfig {
  double kl_smoothing = 1e-9;
  int top_k = 20;
};

struct SynthConfig {
  int commuters = 100;
  int passing = 300;
  int high_freq = 50;
  int randoms = 50;
  int days = 14;
  int zones = 25;
  double continuity = 0.65;  // probability a next trip starts where the last ended
  Date start{Date::parse("2019-08-01")->days};
};

struct PipelineConfig {
  std::optional<std::uint64_t> seed;  // required by generation
  CalendarConfig calendar = CalendarConfig::defaults();
  TimeSpanConfig spans = TimeSpanConfig::defaults();
  std::optional<std::set<std::string>> zone_whitelist;
  MiningConfig mining;
  GenerationConfig generation;
  EvalConfig evaluation;
  SynthConfig synth;

  static PipelineConfig defaults() { return {}; }
  static PipelineConfig load(const std::filesystem::path& file);
  static PipelineConfig parse(std::istream& in, std::string_view origin = "<config>");
  void validate() const;
  void dump(std::ostream& out) const;  // round-trips through parse()
};

}  // namespace tripkg
