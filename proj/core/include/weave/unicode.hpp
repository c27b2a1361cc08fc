#pragma once

#include <string>
#include <string_view>

namespace weave::unicode {

// Thin wrappers over ICU character properties.
bool is_alphabetic(char32_t cp);   // Unicode Alphabetic property
bool is_letter(char32_t cp);       // general category L*
bool is_uppercase(char32_t cp);    // Unicode Uppercase property
bool is_digit(char32_t cp);        // general category Nd
bool is_whitespace(char32_t cp);   // White_Space property
bool is_latin(char32_t cp);        // Script=Latin
char32_t to_lower(char32_t cp);

/// Simple (one-to-one) lowercase mapping of every scalar in UTF-8 input.
std::string lower(std::string_view utf8_text);

/// Collapses runs of Unicode whitespace to a single ASCII space and trims.
std::string normalize_whitespace(std::string_view utf8_text);

/// Trims leading/trailing Unicode whitespace.
std::string trim(std::string_view utf8_text);

/// Converts `bytes` in `charset` to UTF-8. Unknown charsets and undecodable
/// bytes fall back to lossy UTF-8 repair; this never throws.
std::string to_utf8(std::string_view bytes, std::string_view charset);

}  // namespace weave::unicode
