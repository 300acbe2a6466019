#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quarry {

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s);

/// Trims both ends and collapses each internal whitespace run to one space.
std::string normalize_space(std::string_view s);

std::string to_lower_ascii(std::string_view s);
bool iequals_ascii(std::string_view a, std::string_view b);

/// Decimal integer with optional sign; the whole input must be consumed.
std::optional<long long> parse_integer(std::string_view s);

std::optional<bool> parse_bool(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string escape_xml_text(std::string_view s);
std::string escape_xml_attribute(std::string_view s);

/// Cuts to at most `max_bytes` without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string_view s, std::size_t max_bytes);

std::string sha256_hex(std::string_view bytes);

}  // namespace quarry
