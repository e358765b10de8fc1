#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace diffmod::csv {

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// Comma-separated row; fields are written verbatim.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Splits a line written by write_row.
std::vector<std::string> split_row(std::string_view line);

}  // namespace diffmod::csv
