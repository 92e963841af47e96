#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace senm::csv {

/// Splits one RFC 4180 line. Quoted fields may contain commas and doubled quotes;
/// embedded newlines are not supported. Returns false on an unterminated quote.
bool split(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);

/// Strips a trailing '\r' and surrounding spaces.
std::string_view trim(std::string_view s) noexcept;

}  // namespace senm::csv
