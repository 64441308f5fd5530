#include "tripkg/datetime.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace tripkg {

namespace {

bool parse_fixed_uint(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::optional<Date> Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed_uint(iso.substr(0, 4), y) || !parse_fixed_uint(iso.substr(5, 2), m) ||
      !parse_fixed_uint(iso.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return Date{static_cast<std::int32_t>(days)};
}

std::string Date::to_string() const {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

unsigned Date::weekday() const {
  const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{days}}};
  return wd.c_encoding();
}

std::optional<TimeOfDay> TimeOfDay::parse(std::string_view hms) {
  if (hms.size() != 8 || hms[2] != ':' || hms[5] != ':') return std::nullopt;
  int h = 0, m = 0, s = 0;
  if (!parse_fixed_uint(hms.substr(0, 2), h) || !parse_fixed_uint(hms.substr(3, 2), m) ||
      !parse_fixed_uint(hms.substr(6, 2), s)) {
    return std::nullopt;
  }
  if (h > 23 || m > 59 || s > 59) return std::nullopt;
  return TimeOfDay{h * 3600 + m * 60 + s};
}

std::string TimeOfDay::to_string() const {
  char buf[12];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", seconds / 3600, (seconds / 60) % 60,
                seconds % 60);
  return buf;
}

}  // namespace tripkg
