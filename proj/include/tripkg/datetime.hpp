#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tripkg {

/// Calendar date stored as days since the civil epoch (1970-01-01).
struct Date {
  std::int32_t days{0};

  static std::optional<Date> parse(std::string_view iso);  // strict YYYY-MM-DD
  std::string to_string() const;

  /// 0 = Sunday .. 6 = Saturday (std::chrono c_encoding).
  unsigned weekday() const;

  Date next() const { return Date{days + 1}; }
  auto operator<=>(const Date&) const = default;
};

/// Time of day in seconds, 0 .. 86399.
struct TimeOfDay {
  std::int32_t seconds{0};

  static std::optional<TimeOfDay> parse(std::string_view hms);  // strict HH:MM:SS
  std::string to_string() const;

  auto operator<=>(const TimeOfDay&) const = default;
};

inline constexpr std::int32_t kSecondsPerDay = 86400;

}  // namespace tripkg
