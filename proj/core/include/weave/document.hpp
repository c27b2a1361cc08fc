#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace weave {

/// Stable 128-bit document identifier, rendered as 32 lowercase hex digits.
struct DocId {
    std::array<std::uint8_t, 16> bytes{};

    /// Derived from (WARC record id, document URL) so re-runs agree.
    static DocId from_record(std::string_view record_id, std::string_view url);
    static DocId from_hex(std::string_view hex);
    std::string hex() const;

    auto operator<=>(const DocId&) const = default;
};

struct TextNode {
    std::string text;
    std::string tag;

    bool operator==(const TextNode&) const = default;
};

struct ImageNode {
    std::string url;
    std::optional<std::string> sha512;  // 128 hex digits
    std::optional<std::uint64_t> phash;
    std::optional<int> width;
    std::optional<int> height;

    bool operator==(const ImageNode&) const = default;
};

using Node = std::variant<TextNode, ImageNode>;

inline bool is_text(const Node& n) { return std::holds_alternative<TextNode>(n); }
inline bool is_image(const Node& n) { return std::holds_alternative<ImageNode>(n); }

/// A fetched image: digest of the raw downloaded bytes plus decode results
/// and any scorer outputs keyed by score name.
struct ImageRecord {
    std::string url;
    std::string sha512;
    std::uint64_t phash = 0;
    int width = 0;
    int height = 0;
    std::map<std::string, double> scores;

    bool operator==(const ImageRecord&) const = default;
};

using LangScores = std::vector<std::pair<std::string, double>>;

struct Document {
    DocId id;
    std::string source_url;
    std::optional<std::string> lang;
    LangScores lang_scores;
    std::vector<Node> nodes;
    std::set<std::string> stage_flags;
    nlohmann::json meta = nlohmann::json::object();
    /// Unknown top-level JSONL fields, carried through untouched.
    nlohmann::json extra = nlohmann::json::object();

    std::size_t text_count() const;
    std::size_t image_count() const;

    bool operator==(const Document&) const = default;
};

/// UTF-8 byte length of all text node contents joined by '\n'.
std::size_t doc_text_bytes(const Document& doc);

/// Text node contents joined by '\n'; the canonical text used for hashing.
std::string joined_text(const Document& doc);

/// Sum of Unicode scalar counts over text nodes.
std::size_t doc_text_chars(const Document& doc);

std::string phash_hex(std::uint64_t phash);
std::uint64_t parse_phash_hex(std::string_view hex);

/// One JSONL line (no trailing newline). Throws weave::Error when any string
/// is not valid UTF-8.
std::string to_jsonl(const Document& doc);

/// Parses one JSONL line; throws weave::Error on schema violations.
Document from_jsonl(std::string_view line);

}  // namespace weave
