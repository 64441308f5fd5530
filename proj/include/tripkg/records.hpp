#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tripkg/config.hpp"
#include "tripkg/datetime.hpp"

namespace tripkg::ingest {

/// One cleaned trip record: who, when, and the origin/destination zones.
struct TripRecord {
  std::string vehicle;
  Date date;
  TimeOfDay ftime;
  std::string fzone;
  std::string tzone;

  bool operator==(const TripRecord&) const = default;
};

struct RejectedRow {
  std::size_t row;  // 1-based data row number (header not counted)
  std::string reason;
};

struct ParseResult {
  std::vector<TripRecord> records;   // input order
  std::vector<RejectedRow> rejected;
};

/// Parses the canonical CSV (header must include Vehicle, Date, Ftime,
/// Fzone, Tzone; extra columns ignored; field name match is
/// case-insensitive). Malformed rows are collected, not fatal; a missing
/// header or unreadable stream throws.
ParseResult parse_records(std::istream& in,
                          const std::optional<std::set<std::string>>& zone_whitelist = {});
ParseResult parse_records_file(const std::filesystem::path& file,
                               const std::optional<std::set<std::string>>& zone_whitelist = {});

void write_records(std::ostream& out, std::span<const TripRecord> records);
void write_rejects(std::ostream& out, std::span<const RejectedRow> rejects);

}  // namespace tripkg::ingest
