#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace weave::html {

struct Node {
    enum class Kind { element, text };

    Kind kind = Kind::element;
    std::string name;  // lowercased tag name (elements only)
    std::vector<std::pair<std::string, std::string>> attrs;
    std::string text;  // entity-decoded character data (text nodes only)
    std::vector<std::unique_ptr<Node>> children;

    bool is_element() const { return kind == Kind::element; }
    const std::string* attr(std::string_view key) const;
};

/// Error-tolerant HTML tree builder. Handles void elements, raw-text
/// elements, implied end tags (p, li, dd/dt, table parts, headings) and
/// stray end tags without ever failing. Nesting is capped so hostile input
/// cannot exhaust the stack.
class Document {
public:
    static Document parse(std::string_view html);

    const Node& root() const { return *root_; }

private:
    std::unique_ptr<Node> root_;
};

/// Decodes character references (named subset + numeric).
std::string decode_entities(std::string_view s);

/// Finds a charset declared in `<meta charset>` or an http-equiv
/// Content-Type within the first 4 KiB.
std::optional<std::string> sniff_meta_charset(std::string_view raw);

/// Elements that render inline (no implied whitespace at their boundaries).
bool is_inline_element(std::string_view name);

inline constexpr std::size_t kMaxDepth = 512;

}  // namespace weave::html
