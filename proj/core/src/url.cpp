#include "weave/url.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace weave {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

std::string merge_paths(const Url& base, std::string_view ref_path) {
    if (base.has_authority && base.path.empty()) return "/" + std::string(ref_path);
    const auto slash = base.path.rfind('/');
    if (slash == std::string::npos) return std::string(ref_path);
    return base.path.substr(0, slash + 1) + std::string(ref_path);
}

// Strips surrounding ASCII whitespace and drops embedded tab/CR/LF, as
// browsers do for attribute values; encodes inner spaces.
std::string clean_reference(std::string_view raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && static_cast<unsigned char>(raw[b]) <= 0x20) ++b;
    while (e > b && static_cast<unsigned char>(raw[e - 1]) <= 0x20) --e;
    std::string out;
    for (char c : raw.substr(b, e - b)) {
        if (c == '\t' || c == '\n' || c == '\r') continue;
        if (c == ' ') {
            out += "%20";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

Url Url::parse(std::string_view s) {
    Url u;
    std::size_t pos = 0;
    const auto colon = s.find(':');
    const auto first_delim = s.find_first_of("/?#");
    if (colon != std::string_view::npos && (first_delim == std::string_view::npos || colon < first_delim) &&
        valid_scheme(s.substr(0, colon))) {
        u.scheme = ascii_lower(s.substr(0, colon));
        pos = colon + 1;
    }
    if (s.substr(pos, 2) == "//") {
        pos += 2;
        const auto end = s.find_first_of("/?#", pos);
        u.has_authority = true;
        u.authority = std::string(s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        pos = end == std::string_view::npos ? s.size() : end;
    }
    const auto path_end = s.find_first_of("?#", pos);
    u.path = std::string(s.substr(pos, path_end == std::string_view::npos ? std::string_view::npos : path_end - pos));
    pos = path_end == std::string_view::npos ? s.size() : path_end;
    if (pos < s.size() && s[pos] == '?') {
        const auto hash = s.find('#', pos);
        u.has_query = true;
        u.query = std::string(s.substr(pos + 1, hash == std::string_view::npos ? std::string_view::npos : hash - pos - 1));
        pos = hash == std::string_view::npos ? s.size() : hash;
    }
    if (pos < s.size() && s[pos] == '#') {
        u.has_fragment = true;
        u.fragment = std::string(s.substr(pos + 1));
    }
    return u;
}

std::string Url::str() const {
    std::string out;
    if (!scheme.empty()) out += scheme + ":";
    if (has_authority) out += "//" + authority;
    out += path;
    if (has_query) out += "?" + query;
    if (has_fragment) out += "#" + fragment;
    return out;
}

std::string Url::host() const {
    std::string_view a = authority;
    if (const auto at = a.rfind('@'); at != std::string_view::npos) a.remove_prefix(at + 1);
    if (!a.empty() && a.front() == '[') {
        const auto close = a.find(']');
        return ascii_lower(a.substr(0, close == std::string_view::npos ? a.size() : close + 1));
    }
    if (const auto c = a.rfind(':'); c != std::string_view::npos) a = a.substr(0, c);
    return ascii_lower(a);
}

int Url::port() const {
    std::string_view a = authority;
    if (const auto at = a.rfind('@'); at != std::string_view::npos) a.remove_prefix(at + 1);
    const auto close = a.rfind(']');
    const auto c = a.rfind(':');
    if (c != std::string_view::npos && (close == std::string_view::npos || c > close) && c + 1 < a.size()) {
        int p = 0;
        for (char ch : a.substr(c + 1)) {
            if (!std::isdigit(static_cast<unsigned char>(ch))) return 0;
            p = p * 10 + (ch - '0');
            if (p > 65535) return 0;
        }
        return p;
    }
    if (scheme == "http") return 80;
    if (scheme == "https") return 443;
    return 0;
}

std::string Url::request_target() const {
    std::string out = path.empty() ? "/" : path;
    if (has_query) out += "?" + query;
    return out;
}

std::string remove_dot_segments(std::string_view in) {
    std::string input(in);
    std::string output;
    while (!input.empty()) {
        if (input.starts_with("../")) {
            input.erase(0, 3);
        } else if (input.starts_with("./")) {
            input.erase(0, 2);
        } else if (input.starts_with("/./")) {
            input.erase(0, 2);
        } else if (input == "/.") {
            input = "/";
        } else if (input.starts_with("/../") || input == "/..") {
            input = input == "/.." ? "/" : input.substr(3);
            const auto slash = output.rfind('/');
            output.erase(slash == std::string::npos ? 0 : slash);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            const std::size_t start = input[0] == '/' ? 1 : 0;
            const auto next = input.find('/', start);
            const std::size_t len = next == std::string::npos ? input.size() : next;
            output += input.substr(0, len);
            input.erase(0, len);
        }
    }
    return output;
}

std::optional<std::string> resolve_url(std::string_view base_str, std::string_view raw_ref) {
    const Url base = Url::parse(base_str);
    if ((base.scheme != "http" && base.scheme != "https") || !base.has_authority || base.host().empty()) {
        return std::nullopt;
    }
    const std::string ref_str = clean_reference(raw_ref);
    if (ref_str.empty()) return std::nullopt;
    const Url ref = Url::parse(ref_str);

    Url t;
    if (!ref.scheme.empty()) {
        t.scheme = ref.scheme;
        t.has_authority = ref.has_authority;
        t.authority = ref.authority;
        t.path = remove_dot_segments(ref.path);
        t.has_query = ref.has_query;
        t.query = ref.query;
    } else {
        if (ref.has_authority) {
            t.has_authority = true;
            t.authority = ref.authority;
            t.path = remove_dot_segments(ref.path);
            t.has_query = ref.has_query;
            t.query = ref.query;
        } else {
            if (ref.path.empty()) {
                t.path = base.path;
                t.has_query = ref.has_query || base.has_query;
                t.query = ref.has_query ? ref.query : base.query;
            } else {
                t.path = ref.path.front() == '/' ? remove_dot_segments(ref.path)
                                                 : remove_dot_segments(merge_paths(base, ref.path));
                t.has_query = ref.has_query;
                t.query = ref.query;
            }
            t.has_authority = base.has_authority;
            t.authority = base.authority;
        }
        t.scheme = base.scheme;
    }
    t.has_fragment = ref.has_fragment;
    t.fragment = ref.fragment;

    if (t.scheme != "http" && t.scheme != "https") return std::nullopt;
    if (!t.has_authority || t.host().empty()) return std::nullopt;
    return t.str();
}

}  // namespace weave
