#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tripkg::csv {

/// Splits one CSV line. Supports double-quoted fields with "" escapes;
/// does not support embedded newlines (the formats here never need them).
std::vector<std::string> split(std::string_view line);

/// Quotes a field if it contains a comma, quote, or CR/LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Reads the next line, stripping a trailing CR. Returns false at EOF.
bool getline(std::istream& in, std::string& line);

}  // namespace tripkg::csv
