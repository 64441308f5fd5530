#include "tripkg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tripkg {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string{s.substr(b, e - b)};
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::string_view origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw std::invalid_argument(os.str());
}

std::int32_t parse_span_boundary(std::string_view s, std::string_view origin, int line) {
  std::string padded{s};
  if (padded.size() == 5) padded += ":00";  // HH:MM shorthand
  if (padded == "24:00:00") return kSecondsPerDay;
  auto t = TimeOfDay::parse(padded);
  if (!t) fail(origin, line, "bad time-of-day '" + std::string{s} + "'");
  return t->seconds;
}

const std::array<std::string_view, 7> kWeekdayNames = {"Sun", "Mon", "Tue", "Wed",
                                                       "Thu", "Fri", "Sat"};

double parse_double(const std::string& v, std::string_view origin, int line) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(origin, line, "bad number '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& v, std::string_view origin, int line) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) fail(origin, line, "bad integer '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, std::string_view origin, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(origin, line, "bad boolean '" + v + "'");
}

}  // namespace

std::string_view to_string(DayKind k) {
  return k == DayKind::Workday ? "workday" : "holiday";
}

TimeSpanConfig TimeSpanConfig::defaults() {
  TimeSpanConfig cfg;
  cfg.spans = {
      {"EarlyMorning", 0, 7 * 3600},
      {"MorningPeak", 7 * 3600, 9 * 3600 + 1800},
      {"Midday", 9 * 3600 + 1800, 16 * 3600 + 1800},
      {"EveningPeak", 16 * 3600 + 1800, 19 * 3600 + 1800},
      {"Night", 19 * 3600 + 1800, kSecondsPerDay},
  };
  return cfg;
}

void TimeSpanConfig::validate() const {
  if (spans.empty()) throw std::invalid_argument("timespans: at least one span required");
  std::int32_t cursor = 0;
  std::set<std::string_view> names;
  for (const auto& s : spans) {
    if (s.name.empty()) throw std::invalid_argument("timespans: empty span name");
    if (!names.insert(s.name).second)
      throw std::invalid_argument("timespans: duplicate span name '" + s.name + "'");
    if (s.begin != cursor)
      throw std::invalid_argument("timespans: span '" + s.name + "' leaves a gap or overlap at " +
                                  TimeOfDay{cursor}.to_string());
    if (s.end <= s.begin) throw std::invalid_argument("timespans: span '" + s.name + "' is empty");
    cursor = s.end;
  }
  if (cursor != kSecondsPerDay)
    throw std::invalid_argument("timespans: spans do not cover the day up to 24:00:00");
}

std::size_t TimeSpanConfig::index_of(TimeOfDay t) const {
  // coverage is validated, so the lookup is total
  auto it = std::upper_bound(spans.begin(), spans.end(), t.seconds,
                             [](std::int32_t v, const TimeSpan& s) { return v < s.end; });
  return std::size_t(it - spans.begin());
}

std::optional<std::size_t> TimeSpanConfig::index_by_name(std::string_view name) const {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].name == name) return i;
  }
  return std::nullopt;
}

CalendarConfig CalendarConfig::defaults() {
  CalendarConfig cfg;
  cfg.weekday_rule.fill(DayKind::Workday);
  cfg.weekday_rule[0] = DayKind::Holiday;  // Sunday
  cfg.weekday_rule[6] = DayKind::Holiday;  // Saturday
  return cfg;
}

DayKind map_week(Date d, const CalendarConfig& cal) {
  if (cal.holiday_dates.contains(d)) return DayKind::Holiday;
  return cal.weekday_rule[d.weekday()];
}

const std::string& map_timespan(TimeOfDay t, const TimeSpanConfig& cfg) {
  return cfg.name_of(t);
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config file: " + file.string());
  return parse(in, file.string());
}

PipelineConfig PipelineConfig::parse(std::istream& in, std::string_view origin) {
  PipelineConfig cfg;
  bool spans_overridden = false;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // inline comments start with ' #' or ' ;'
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') &&
          (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.resize(i);
        break;
      }
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail(origin, lineno, "unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      static const std::set<std::string_view> known = {"calendar",   "timespans", "ingest",
                                                       "mining",     "generation", "evaluation",
                                                       "synth"};
      if (!known.contains(section)) fail(origin, lineno, "unknown section [" + section + "]");
      if (section == "timespans" && !spans_overridden) {
        cfg.spans.spans.clear();
        spans_overridden = true;
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (section.empty()) {
      if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(value, origin, lineno));
      } else {
        fail(origin, lineno, "unknown key '" + key + "'");
      }
    } else if (section == "calendar") {
      if (key == "holidays") {
        for (const auto& item : split_list(value)) {
          auto d = Date::parse(item);
          if (!d) fail(origin, lineno, "bad date '" + item + "'");
          cfg.calendar.holiday_dates.insert(*d);
        }
      } else if (key == "holiday_weekdays") {
        cfg.calendar.weekday_rule.fill(DayKind::Workday);
        for (const auto& item : split_list(value)) {
          auto it = std::find(kWeekdayNames.begin(), kWeekdayNames.end(), item);
          if (it == kWeekdayNames.end()) fail(origin, lineno, "bad weekday '" + item + "'");
          cfg.calendar.weekday_rule[std::size_t(it - kWeekdayNames.begin())] = DayKind::Holiday;
        }
      } else {
        fail(origin, lineno, "unknown key '" + key + "' in [calendar]");
      }
    } else if (section == "timespans") {
      const auto dash = value.find('-');
      if (dash == std::string::npos) fail(origin, lineno, "expected 'HH:MM-HH:MM' span value");
      TimeSpan span;
      span.name = key;
      span.begin = parse_span_boundary(trim(value.substr(0, dash)), origin, lineno);
      span.end = parse_span_boundary(trim(value.substr(dash + 1)), origin, lineno);
      cfg.spans.spans.push_back(std::move(span));
    } else if (section == "ingest") {
      if (key == "zone_whitelist") {
        std::set<std::string> zones;
        for (auto& z : split_list(value)) zones.insert(std::move(z));
        if (!zones.empty()) cfg.zone_whitelist = std::move(zones);
      } else {
        fail(origin, lineno, "unknown key '" + key + "' in [ingest]");
      }
    } else if (section == "mining") {
      auto& m = cfg.mining;
      if (key == "freq_t1") m.freq_t1 = parse_double(value, origin, lineno);
      else if (key == "freq_t2") m.freq_t2 = parse_double(value, origin, lineno);
      else if (key == "freq_t3") m.freq_t3 = parse_double(value, origin, lineno);
      else if (key == "theta_am") m.theta_am = parse_double(value, origin, lineno);
      else if (key == "theta_d") m.theta_d = int(parse_int(value, origin, lineno));
      else if (key == "rho") m.rho = parse_double(value, origin, lineno);
      else if (key == "window_days") m.window_days = int(parse_int(value, origin, lineno));
      else if (key == "association_formula") {
        if (value == "capped") m.formula = AssociationFormula::Capped;
        else if (value == "literal") m.formula = AssociationFormula::Literal;
        else fail(origin, lineno, "association_formula must be 'capped' or 'literal'");
      } else if (key == "association_match") {
        if (value == "same_trip") m.match = AssociationMatch::SameTrip;
        else if (value == "same_day") m.match = AssociationMatch::SameDay;
        else fail(origin, lineno, "association_match must be 'same_trip' or 'same_day'");
      } else {
        fail(origin, lineno, "unknown key '" + key + "' in [mining]");
      }
    } else if (section == "generation") {
      auto& g = cfg.generation;
      if (key == "beam_width") g.beam_width = int(parse_int(value, origin, lineno));
      else if (key == "early_exit_epsilon") g.early_exit_epsilon = parse_double(value, origin, lineno);
      else if (key == "association_depth") g.association_depth = int(parse_int(value, origin, lineno));
      else if (key == "keep_mapping") g.keep_mapping = parse_bool(value, origin, lineno);
      else fail(origin, lineno, "unknown key '" + key + "' in [generation]");
    } else if (section == "evaluation") {
      auto& e = cfg.evaluation;
      if (key == "kl_smoothing") e.kl_smoothing = parse_double(value, origin, lineno);
      else if (key == "top_k") e.top_k = int(parse_int(value, origin, lineno));
      else fail(origin, lineno, "unknown key '" + key + "' in [evaluation]");
    } else if (section == "synth") {
      auto& s = cfg.synth;
      if (key == "commuters") s.commuters = int(parse_int(value, origin, lineno));
      else if (key == "passing") s.passing = int(parse_int(value, origin, lineno));
      else if (key == "high_freq") s.high_freq = int(parse_int(value, origin, lineno));
      else if (key == "randoms") s.randoms = int(parse_int(value, origin, lineno));
      else if (key == "days") s.days = int(parse_int(value, origin, lineno));
      else if (key == "zones") s.zones = int(parse_int(value, origin, lineno));
      else if (key == "continuity") s.continuity = parse_double(value, origin, lineno);
      else if (key == "start") {
        auto d = Date::parse(value);
        if (!d) fail(origin, lineno, "bad date '" + value + "'");
        s.start = *d;
      } else {
        fail(origin, lineno, "unknown key '" + key + "' in [synth]");
      }
    }
  }
  cfg.validate();
  return cfg;
}

void PipelineConfig::validate() const {
  spans.validate();
  if (mining.freq_t1 <= 0 || mining.freq_t1 >= mining.freq_t2 || mining.freq_t2 >= mining.freq_t3)
    throw std::invalid_argument("mining: frequency thresholds must satisfy 0 < t1 < t2 < t3");
  if (mining.theta_am < 0 || mining.theta_am > 100)
    throw std::invalid_argument("mining: theta_am must be in [0, 100]");
  if (mining.theta_d < 0 || mining.theta_d > 6)
    throw std::invalid_argument("mining: theta_d must be in [0, 6]");
  if (mining.rho <= 0) throw std::invalid_argument("mining: rho must be positive");
  if (mining.window_days < 0) throw std::invalid_argument("mining: window_days must be >= 0");
  if (generation.beam_width < 1) throw std::invalid_argument("generation: beam_width must be >= 1");
  if (generation.early_exit_epsilon < 0)
    throw std::invalid_argument("generation: early_exit_epsilon must be >= 0");
  if (generation.association_depth < 1)
    throw std::invalid_argument("generation: association_depth must be >= 1");
  if (evaluation.kl_smoothing <= 0)
    throw std::invalid_argument("evaluation: kl_smoothing must be > 0");
  if (evaluation.top_k < 1) throw std::invalid_argument("evaluation: top_k must be >= 1");
  if (synth.commuters < 0 || synth.passing < 0 || synth.high_freq < 0 || synth.randoms < 0 ||
      synth.days < 1 || synth.zones < 2)
    throw std::invalid_argument("synth: cohort sizes must be >= 0, days >= 1, zones >= 2");
  if (synth.continuity < 0 || synth.continuity > 1)
    throw std::invalid_argument("synth: continuity must be in [0, 1]");
}

void PipelineConfig::dump(std::ostream& out) const {
  if (seed) out << "seed = " << *seed << "\n";
  out << "\n[calendar]\n";
  if (!calendar.holiday_dates.empty()) {
    out << "holidays = ";
    bool first = true;
    for (const auto& d : calendar.holiday_dates) {
      if (!first) out << ", ";
      out << d.to_string();
      first = false;
    }
    out << "\n";
  }
  out << "holiday_weekdays = ";
  bool first = true;
  for (std::size_t i = 0; i < 7; ++i) {
    if (calendar.weekday_rule[i] == DayKind::Holiday) {
      if (!first) out << ", ";
      out << kWeekdayNames[i];
      first = false;
    }
  }
  out << "\n\n[timespans]\n";
  for (const auto& s : spans.spans) {
    const auto fmt = [](std::int32_t sec) {
      return sec == kSecondsPerDay ? std::string{"24:00:00"} : TimeOfDay{sec}.to_string();
    };
    out << s.name << " = " << fmt(s.begin) << "-" << fmt(s.end) << "\n";
  }
  if (zone_whitelist) {
    out << "\n[ingest]\nzone_whitelist = ";
    first = true;
    for (const auto& z : *zone_whitelist) {
      if (!first) out << ", ";
      out << z;
      first = false;
    }
    out << "\n";
  }
  out << "\n[mining]\n";
  out << "freq_t1 = " << mining.freq_t1 << "\n";
  out << "freq_t2 = " << mining.freq_t2 << "\n";
  out << "freq_t3 = " << mining.freq_t3 << "\n";
  out << "theta_am = " << mining.theta_am << "\n";
  out << "theta_d = " << mining.theta_d << "\n";
  out << "rho = " << mining.rho << "\n";
  out << "association_formula = "
      << (mining.formula == AssociationFormula::Capped ? "capped" : "literal") << "\n";
  out << "association_match = "
      << (mining.match == AssociationMatch::SameTrip ? "same_trip" : "same_day") << "\n";
  out << "window_days = " << mining.window_days << "\n";
  out << "\n[generation]\n";
  out << "beam_width = " << generation.beam_width << "\n";
  out << "early_exit_epsilon = " << generation.early_exit_epsilon << "\n";
  out << "association_depth = " << generation.association_depth << "\n";
  out << "keep_mapping = " << (generation.keep_mapping ? "true" : "false") << "\n";
  out << "\n[evaluation]\n";
  out << "kl_smoothing = " << evaluation.kl_smoothing << "\n";
  out << "top_k = " << evaluation.top_k << "\n";
  out << "\n[synth]\n";
  out << "commuters = " << synth.commuters << "\n";
  out << "passing = " << synth.passing << "\n";
  out << "high_freq = " << synth.high_freq << "\n";
  out << "randoms = " << synth.randoms << "\n";
  out << "days = " << synth.days << "\n";
  out << "zones = " << synth.zones << "\n";
  out << "continuity = " << synth.continuity << "\n";
  out << "start = " << synth.start.to_string() << "\n";
}

}  // namespace tripkg
