#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "weave/document.hpp"

namespace weave {

class StageCounter;

/// Node heuristics in their fixed evaluation order; the first rule that fires
/// is the reported drop reason.
enum class NodeRule {
    empty = 1,
    min_bytes,
    digit_ratio,
    dates,
    lorem_ipsum,
    nonalpha_ratio,
    curly_braces,
    angle_symbols,
    banned_substring,
    caps_ratio,
    banned_exact,
    char_dominance,
};

std::string_view to_string(NodeRule rule);

struct NodeFilterConfig {
    std::size_t min_bytes_latin = 5;
    std::size_t min_bytes_nonlatin = 15;
    std::size_t min_bytes_post = 10;
    std::size_t min_bytes_post_clean = 5;
    double digit_ratio_max = 0.30;
    double nonalpha_ratio_max = 0.33;
    double caps_ratio_max = 0.20;
    double char_dominance_max = 0.33;
    std::size_t angle_symbol_max = 2;
    std::size_t max_dates = 1;
    /// Case-sensitive; the all-caps spellings are left to the caps rule.
    std::vector<std::string> banned_substrings = {"Follow us", "follow us", "javascript", "Javascript",
                                                  "JavaScript", "copyright", "Copyright", "©"};
    /// Compared against the lowercased, trimmed node text.
    std::vector<std::string> banned_exact = {"comment", "facebook", "instagram", "twitter",
                                             "rss",     "newsletter", "share", "follow us"};
    std::vector<std::string> date_patterns = default_date_patterns();

    static std::vector<std::string> default_date_patterns();
};

/// Date patterns compiled into one alternation, counted non-overlapping.
class DateMatcher {
public:
    explicit DateMatcher(const std::vector<std::string>& patterns);
    std::size_t count(std::string_view text) const;

private:
    std::regex re_;
};

/// Case-insensitive whole-word matcher built from a wordlist.
class WordlistMatcher {
public:
    WordlistMatcher() = default;
    explicit WordlistMatcher(const std::vector<std::string>& terms);

    bool matches(std::string_view text) const;
    bool empty() const { return !re_.has_value(); }
    std::size_t size() const { return terms_; }

private:
    std::optional<std::regex> re_;
    std::size_t terms_ = 0;
};

/// One term per line, '#' starts a comment, blank lines ignored.
std::vector<std::string> load_wordlist(const std::filesystem::path& path);
std::vector<std::string> default_nsfw_wordlist();

struct DocFilterConfig {
    std::size_t min_text_nodes = 5;
    std::size_t min_chars = 300;
    std::shared_ptr<const WordlistMatcher> nsfw = std::make_shared<WordlistMatcher>(default_nsfw_wordlist());
};

/// True iff Latin-script letters make up more than half of all letters.
bool is_latin_script(std::string_view text);

struct NodeVerdict {
    bool keep = true;
    NodeRule rule = NodeRule::empty;  // meaningful only when !keep

    static NodeVerdict kept() { return {}; }
    static NodeVerdict dropped(NodeRule r) { return {false, r}; }
};

/// Evaluates the twelve heuristics in order.
NodeVerdict filter_node(std::string_view text, const NodeFilterConfig& cfg, const DateMatcher& dates);
NodeVerdict filter_node(std::string_view text, const NodeFilterConfig& cfg = {});

/// Deletes URLs, collapses runs of each special character to one, then
/// normalizes whitespace. Idempotent.
std::string clean_node(std::string_view text);

/// Keeps the node iff its UTF-8 length is strictly greater than `min_bytes`.
bool post_clean_gate(std::string_view text, std::size_t min_bytes = 10);

struct DocVerdict {
    bool keep = true;
    std::string reason;  // nsfw | too_small_nodes | too_small_chars
};

DocVerdict filter_document(const Document& doc, const DocFilterConfig& cfg = {});

/// Node-level pass over a document: heuristics, cleaning, then the two
/// post-clean byte gates. Dropped nodes are counted on `counter` (may be null).
void filter_text_nodes(Document& doc, const NodeFilterConfig& cfg, const DateMatcher& dates, StageCounter* counter);

}  // namespace weave
