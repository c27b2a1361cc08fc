#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace weave::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// True when `s` is well-formed UTF-8 (no overlongs, no surrogates, <= U+10FFFF).
bool is_valid(std::string_view s);

/// Decodes `s` into scalar values. Ill-formed sequences decode to U+FFFD.
std::u32string decode(std::string_view s);

/// Number of scalar values in `s` (ill-formed bytes count as one each).
std::size_t length(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

/// Replaces every ill-formed sequence with U+FFFD.
std::string repair(std::string_view s);

/// Decodes the scalar at `pos`, advancing it. Returns U+FFFD on malformed input.
char32_t next(std::string_view s, std::size_t& pos);

}  // namespace weave::utf8
