#include "weave/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/ucnv.h>
#include <unicode/uscript.h>

#include <algorithm>
#include <cctype>
#include <memory>

#include "weave/utf8.hpp"

namespace weave::unicode {

bool is_alphabetic(char32_t cp) { return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_ALPHABETIC); }

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }

bool is_uppercase(char32_t cp) { return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_UPPERCASE); }

bool is_digit(char32_t cp) { return u_isdigit(static_cast<UChar32>(cp)); }

bool is_whitespace(char32_t cp) { return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_WHITE_SPACE); }

bool is_latin(char32_t cp) {
    UErrorCode status = U_ZERO_ERROR;
    const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &status);
    return U_SUCCESS(status) && script == USCRIPT_LATIN;
}

char32_t to_lower(char32_t cp) { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))); }

std::string lower(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) utf8::append(out, to_lower(utf8::next(text, pos)));
    return out;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = utf8::next(text, pos);
        if (is_whitespace(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        utf8::append(out, cp);
    }
    return out;
}

std::string trim(std::string_view text) {
    const std::u32string cps = utf8::decode(text);
    std::size_t begin = 0;
    std::size_t end = cps.size();
    while (begin < end && is_whitespace(cps[begin])) ++begin;
    while (end > begin && is_whitespace(cps[end - 1])) --end;
    return utf8::encode(std::u32string_view(cps).substr(begin, end - begin));
}

std::string to_utf8(std::string_view bytes, std::string_view charset) {
    std::string name(charset);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name.empty() || name == "utf-8" || name == "utf8" || name == "us-ascii" || name == "ascii") {
        return utf8::repair(bytes);
    }

    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<UConverter, decltype(&ucnv_close)> conv(ucnv_open(name.c_str(), &status), &ucnv_close);
    if (U_FAILURE(status) || !conv) return utf8::repair(bytes);

    std::u16string utf16(bytes.size() * 2 + 16, u'\0');
    status = U_ZERO_ERROR;
    const int32_t n16 = ucnv_toUChars(conv.get(), reinterpret_cast<UChar*>(utf16.data()),
                                      static_cast<int32_t>(utf16.size()), bytes.data(),
                                      static_cast<int32_t>(bytes.size()), &status);
    if (U_FAILURE(status)) return utf8::repair(bytes);
    utf16.resize(static_cast<std::size_t>(n16));

    std::string out;
    out.reserve(utf16.size());
    for (std::size_t i = 0; i < utf16.size(); ++i) {
        char32_t cp = utf16[i];
        if (cp >= 0xD800 && cp <= 0xDBFF && i + 1 < utf16.size() && utf16[i + 1] >= 0xDC00 && utf16[i + 1] <= 0xDFFF) {
            cp = 0x10000 + ((cp - 0xD800) << 10) + (utf16[i + 1] - 0xDC00);
            ++i;
        } else if (cp >= 0xD800 && cp <= 0xDFFF) {
            cp = utf8::kReplacement;
        }
        utf8::append(out, cp);
    }
    return out;
}

}  // namespace weave::unicode
