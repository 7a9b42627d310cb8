#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace creditbench {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  long column(std::string_view name) const;
};

// RFC 4180 reader: quoted fields may contain delimiters, doubled quotes and
// line breaks; CRLF and LF line endings are accepted. The first record is the
// header. Throws DataError naming the offending record (1-based, header = 1).
CsvTable read_csv(std::istream& in, char delimiter = ',');
CsvTable read_csv_file(const std::filesystem::path& path, char delimiter = ',');

std::string csv_escape(std::string_view field, char delimiter = ',');
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

// Shortest representation that round-trips through std::from_chars.
std::string format_double(double value);
// Fixed-point formatting used by rendered reports.
std::string format_fixed(double value, int decimals);

bool parse_double(std::string_view text, double& value);

}  // namespace creditbench
