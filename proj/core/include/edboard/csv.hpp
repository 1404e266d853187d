#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace edboard::csv {

/// A parsed CSV file: header plus data rows as raw strings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws ValidationError when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

/// Writes fields joined by commas, quoting any field containing a comma or quote.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);
/// Fixed-point text with `decimals` digits after the point.
std::string format_fixed(double value, int decimals = 4);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace edboard::csv
