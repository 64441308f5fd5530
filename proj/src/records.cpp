#include "tripkg/records.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "tripkg/csv.hpp"

namespace tripkg::ingest {

namespace {

std::string lower(std::string_view s) {
  std::string out{s};
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

constexpr std::size_t kMissing = ~std::size_t{0};

}  // namespace

ParseResult parse_records(std::istream& in,
                          const std::optional<std::set<std::string>>& zone_whitelist) {
  if (!in) throw std::runtime_error("ingest: unreadable input stream");

  std::string line;
  if (!csv::getline(in, line)) throw std::runtime_error("ingest: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = csv::split(line);
  std::array<std::size_t, 5> col;  // vehicle, date, ftime, fzone, tzone
  col.fill(kMissing);
  static constexpr std::array<std::string_view, 5> names = {"vehicle", "date", "ftime", "fzone",
                                                            "tzone"};
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = lower(header[i]);
    for (std::size_t f = 0; f < names.size(); ++f) {
      if (h == names[f] && col[f] == kMissing) col[f] = i;
    }
  }
  for (std::size_t f = 0; f < names.size(); ++f) {
    if (col[f] == kMissing)
      throw std::runtime_error("ingest: header is missing required field '" +
                               std::string{names[f]} + "'");
  }

  ParseResult result;
  std::size_t row = 0;
  while (csv::getline(in, line)) {
    ++row;
    if (line.empty()) {
      result.rejected.push_back({row, "empty-row"});
      continue;
    }
    const auto fields = csv::split(line);
    const auto max_col = *std::max_element(col.begin(), col.end());
    if (fields.size() <= max_col) {
      result.rejected.push_back({row, "bad-field-count"});
      continue;
    }
    TripRecord rec;
    rec.vehicle = fields[col[0]];
    rec.fzone = fields[col[3]];
    rec.tzone = fields[col[4]];
    if (rec.vehicle.empty() || rec.fzone.empty() || rec.tzone.empty() ||
        fields[col[1]].empty() || fields[col[2]].empty()) {
      result.rejected.push_back({row, "empty-field"});
      continue;
    }
    const auto date = Date::parse(fields[col[1]]);
    if (!date) {
      result.rejected.push_back({row, "bad-date"});
      continue;
    }
    const auto ftime = TimeOfDay::parse(fields[col[2]]);
    if (!ftime) {
      result.rejected.push_back({row, "bad-time"});
      continue;
    }
    if (zone_whitelist &&
        (!zone_whitelist->contains(rec.fzone) || !zone_whitelist->contains(rec.tzone))) {
      result.rejected.push_back({row, "unknown-zone"});
      continue;
    }
    rec.date = *date;
    rec.ftime = *ftime;
    result.records.push_back(std::move(rec));
  }
  return result;
}

ParseResult parse_records_file(const std::filesystem::path& file,
                               const std::optional<std::set<std::string>>& zone_whitelist) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("ingest: cannot open " + file.string());
  return parse_records(in, zone_whitelist);
}

void write_records(std::ostream& out, std::span<const TripRecord> records) {
  out << "Vehicle,Date,Ftime,Fzone,Tzone\n";
  for (const auto& r : records) {
    csv::write_row(out, {r.vehicle, r.date.to_string(), r.ftime.to_string(), r.fzone, r.tzone});
  }
}

void write_rejects(std::ostream& out, std::span<const RejectedRow> rejects) {
  out << "row,reason\n";
  for (const auto& r : rejects) {
    csv::write_row(out, {std::to_string(r.row), r.reason});
  }
}

}  // namespace tripkg::ingest
