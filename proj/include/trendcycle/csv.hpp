#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tc::csv {

/// Full-precision decimal (17 significant digits); "NA" for missing.
std::string format(double v);

/// Splits one CSV line on `sep`, trimming whitespace and surrounding quotes.
std::vector<std::string> split(std::string_view line, char sep = ',');

/// Parses a real number, optionally with a decimal comma. Throws DataError.
double parse_number(std::string_view text, bool decimal_comma = false);

}  // namespace tc::csv
