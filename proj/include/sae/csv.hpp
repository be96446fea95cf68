#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sae::csv {

/// Splits RFC-4180 text into rows. Throws std::invalid_argument with the
/// 1-based line number on an unterminated quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

} // namespace sae::csv
