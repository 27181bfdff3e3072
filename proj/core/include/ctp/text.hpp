#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ctp::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;

/// Number of UTF-8 code points (continuation bytes are not counted, so
/// invalid sequences still yield a finite, stable count).
std::size_t utf8_length(std::string_view s) noexcept;

/// Longest prefix holding at most `n` code points; never splits a sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t n) noexcept;

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace ctp::text
