#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace weave {

/// RFC 3986 components. `has_*` distinguishes an empty component from an
/// absent one, which matters for reference resolution.
struct Url {
    std::string scheme;
    bool has_authority = false;
    std::string authority;
    std::string path;
    bool has_query = false;
    std::string query;
    bool has_fragment = false;
    std::string fragment;

    static Url parse(std::string_view s);
    std::string str() const;

    /// Host without userinfo or port, lowercased.
    std::string host() const;
    /// Explicit port or the scheme default (80/443); 0 when unknown.
    int port() const;
    /// Path plus query, as sent in an HTTP request line ("/" when empty).
    std::string request_target() const;
};

/// Resolves `ref` against `base`. Returns nullopt for data:/javascript: and
/// other non-http(s) results, for empty references, or when `base` is not an
/// absolute http(s) URL.
std::optional<std::string> resolve_url(std::string_view base, std::string_view ref);

std::string remove_dot_segments(std::string_view path);

}  // namespace weave
