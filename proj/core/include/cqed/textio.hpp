#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cqed {

// Shortest representation that round-trips; "nan", "inf", "-inf" for
// non-finite values. Locale independent.
std::string format_double(double x);

// Strict parse of a full field; throws InputError.
double parse_double(std::string_view field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// Numeric CSV with one header line. Blank lines and lines starting with '#'
// are skipped. Errors carry the offending line number.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string join_csv_row(const std::vector<double>& values);

void write_text_file(const std::string& path, std::string_view contents);
std::string read_text_file(const std::string& path);

}  // namespace cqed
