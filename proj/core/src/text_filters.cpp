#include "weave/text_filters.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "weave/error.hpp"
#include "weave/stats.hpp"
#include "weave/unicode.hpp"
#include "weave/utf8.hpp"

namespace weave {

std::string_view to_string(NodeRule rule) {
    switch (rule) {
        case NodeRule::empty: return "empty";
        case NodeRule::min_bytes: return "min_bytes";
        case NodeRule::digit_ratio: return "digit_ratio";
        case NodeRule::dates: return "dates";
        case NodeRule::lorem_ipsum: return "lorem_ipsum";
        case NodeRule::nonalpha_ratio: return "nonalpha_ratio";
        case NodeRule::curly_braces: return "curly_braces";
        case NodeRule::angle_symbols: return "angle_symbols";
        case NodeRule::banned_substring: return "banned_substring";
        case NodeRule::caps_ratio: return "caps_ratio";
        case NodeRule::banned_exact: return "banned_exact";
        case NodeRule::char_dominance: return "char_dominance";
    }
    return "unknown";
}

std::vector<std::string> NodeFilterConfig::default_date_patterns() {
    const std::string month =
        "(?:January|February|March|April|May|June|July|August|September|October|November|December|"
        "Sept|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Oct|Nov|Dec)";
    return {
        R"(\d{1,4}[-/.]\d{1,2}[-/.]\d{1,4})",
        month + R"( \d{1,2}(?:, \d{2,4})?)",
        R"(\d{1,2} )" + month + R"( \d{2,4})",
    };
}

DateMatcher::DateMatcher(const std::vector<std::string>& patterns) {
    std::string alt;
    for (const auto& p : patterns) {
        if (!alt.empty()) alt += "|";
        alt += "(?:" + p + ")";
    }
    if (alt.empty()) alt = "(?!)";
    re_ = std::regex(alt, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
}

std::size_t DateMatcher::count(std::string_view text) const {
    using It = std::regex_iterator<std::string_view::const_iterator>;
    std::size_t n = 0;
    for (It it(text.begin(), text.end(), re_), end; it != end; ++it) ++n;
    return n;
}

namespace {

std::string regex_escape(std::string_view s) {
    static const std::string kSpecial = R"(\^$.|?*+()[]{}/)";
    std::string out;
    for (char c : s) {
        if (kSpecial.find(c) != std::string::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

WordlistMatcher::WordlistMatcher(const std::vector<std::string>& terms) {
    std::vector<std::string> sorted;
    for (const auto& t : terms) {
        if (!t.empty()) sorted.push_back(t);
    }
    if (sorted.empty()) return;
    // Longest first so alternation prefers full terms.
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    std::string alt;
    for (const auto& t : sorted) {
        if (!alt.empty()) alt += "|";
        alt += regex_escape(t);
    }
    re_ = std::regex("\\b(?:" + alt + ")\\b", std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    terms_ = sorted.size();
}

bool WordlistMatcher::matches(std::string_view text) const {
    if (!re_) return false;
    return std::regex_search(text.begin(), text.end(), *re_);
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open wordlist " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = unicode::trim(line);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::vector<std::string> default_nsfw_wordlist() {
    return {"porn", "porno", "pornography", "xxx", "hardcore sex", "sex video", "sex videos", "nude",
            "nudes", "naked girls", "camgirl", "camgirls", "webcam sex", "escort girls", "milf", "hentai",
            "blowjob", "handjob", "gangbang", "threesome sex", "erotic video", "adult video", "pussy",
            "dildo", "orgasm", "fetish porn", "bdsm", "striptease", "onlyfans leak", "nsfw"};
}

bool is_latin_script(std::string_view text) {
    std::size_t letters = 0;
    std::size_t latin = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = utf8::next(text, pos);
        if (!unicode::is_alphabetic(cp)) continue;
        ++letters;
        if (unicode::is_latin(cp)) ++latin;
    }
    return letters > 0 && 2 * latin > letters;
}

NodeVerdict filter_node(std::string_view text, const NodeFilterConfig& cfg) {
    static const DateMatcher kDefaultDates(NodeFilterConfig::default_date_patterns());
    return filter_node(text, cfg, kDefaultDates);
}

NodeVerdict filter_node(std::string_view text, const NodeFilterConfig& cfg, const DateMatcher& dates) {
    if (text.empty()) return NodeVerdict::dropped(NodeRule::empty);

    const std::size_t min_bytes = is_latin_script(text) ? cfg.min_bytes_latin : cfg.min_bytes_nonlatin;
    if (text.size() < min_bytes) return NodeVerdict::dropped(NodeRule::min_bytes);

    const std::u32string cps = utf8::decode(text);
    const double total = static_cast<double>(cps.size());

    std::size_t digits = 0;
    std::size_t non_ws = 0;
    std::size_t non_alpha = 0;
    std::size_t letters = 0;
    std::size_t upper = 0;
    std::size_t angles = 0;
    bool braces = false;
    std::unordered_map<char32_t, std::size_t> freq;
    for (char32_t cp : cps) {
        ++freq[cp];
        if (unicode::is_digit(cp)) ++digits;
        const bool ws = unicode::is_whitespace(cp);
        const bool alpha = unicode::is_alphabetic(cp);
        if (!ws) ++non_ws;
        if (!ws && !alpha) ++non_alpha;
        if (alpha) {
            ++letters;
            if (unicode::is_uppercase(cp)) ++upper;
        }
        if (cp == U'{' || cp == U'}') braces = true;
        if (cp == U'<' || cp == U'>' || cp == U'≤' || cp == U'≥') ++angles;
    }

    if (static_cast<double>(digits) > cfg.digit_ratio_max * total) return NodeVerdict::dropped(NodeRule::digit_ratio);
    if (dates.count(text) > cfg.max_dates) return NodeVerdict::dropped(NodeRule::dates);

    const std::string lowered = unicode::lower(text);
    if (lowered.find("lorem ipsum") != std::string::npos) return NodeVerdict::dropped(NodeRule::lorem_ipsum);

    if (non_ws > 0 && static_cast<double>(non_alpha) > cfg.nonalpha_ratio_max * static_cast<double>(non_ws)) {
        return NodeVerdict::dropped(NodeRule::nonalpha_ratio);
    }
    if (braces) return NodeVerdict::dropped(NodeRule::curly_braces);
    if (angles > cfg.angle_symbol_max) return NodeVerdict::dropped(NodeRule::angle_symbols);

    for (const auto& s : cfg.banned_substrings) {
        if (!s.empty() && text.find(s) != std::string_view::npos) return NodeVerdict::dropped(NodeRule::banned_substring);
    }
    if (letters > 0 && static_cast<double>(upper) > cfg.caps_ratio_max * static_cast<double>(letters)) {
        return NodeVerdict::dropped(NodeRule::caps_ratio);
    }
    const std::string exact = unicode::trim(lowered);
    for (const auto& s : cfg.banned_exact) {
        if (exact == s) return NodeVerdict::dropped(NodeRule::banned_exact);
    }
    std::size_t most = 0;
    for (const auto& [cp, n] : freq) most = std::max(most, n);
    if (static_cast<double>(most) > cfg.char_dominance_max * total) return NodeVerdict::dropped(NodeRule::char_dominance);

    return NodeVerdict::kept();
}

namespace {

bool is_url_scheme_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Removes `scheme://...` and `www....` tokens up to the next whitespace.
std::string strip_urls(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const bool at_boundary = i == 0 || !is_word_char(text[i - 1]);
        std::size_t url_end = std::string_view::npos;
        if (at_boundary) {
            if (std::isalpha(static_cast<unsigned char>(text[i]))) {
                std::size_t j = i;
                while (j < text.size() && is_url_scheme_char(text[j])) ++j;
                if (text.substr(j, 3) == "://") url_end = j + 3;
            }
            if (url_end == std::string_view::npos && (text.substr(i, 4) == "www." || text.substr(i, 4) == "WWW.")) {
                url_end = i + 4;
            }
        }
        if (url_end == std::string_view::npos) {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = url_end;
        while (j < text.size()) {
            std::size_t probe = j;
            const char32_t cp = utf8::next(text, probe);
            if (unicode::is_whitespace(cp)) break;
            j = probe;
        }
        i = j;
    }
    return out;
}

bool is_collapsible(char c) {
    switch (c) {
        case '\t': case '\n': case '#': case '/': case '$': case ')': case '(':
        case '[': case ']': case '!': case '?': case '%': case '<': case '>':
            return true;
        default:
            return false;
    }
}

}  // namespace

std::string clean_node(std::string_view text) {
    const std::string no_urls = strip_urls(text);
    std::string collapsed;
    collapsed.reserve(no_urls.size());
    for (char c : no_urls) {
        if (is_collapsible(c) && !collapsed.empty() && collapsed.back() == c) continue;
        collapsed.push_back(c);
    }
    return unicode::normalize_whitespace(collapsed);
}

bool post_clean_gate(std::string_view text, std::size_t min_bytes) { return text.size() > min_bytes; }

DocVerdict filter_document(const Document& doc, const DocFilterConfig& cfg) {
    if (cfg.nsfw) {
        for (const auto& node : doc.nodes) {
            if (const auto* t = std::get_if<TextNode>(&node); t && cfg.nsfw->matches(t->text)) return {false, "nsfw"};
        }
    }
    if (doc.text_count() < cfg.min_text_nodes) return {false, "too_small_nodes"};
    if (doc_text_chars(doc) < cfg.min_chars) return {false, "too_small_chars"};
    return {true, {}};
}

void filter_text_nodes(Document& doc, const NodeFilterConfig& cfg, const DateMatcher& dates, StageCounter* counter) {
    std::vector<Node> kept;
    kept.reserve(doc.nodes.size());
    for (auto& node : doc.nodes) {
        auto* t = std::get_if<TextNode>(&node);
        if (t == nullptr) {
            kept.push_back(std::move(node));
            continue;
        }
        if (counter) counter->add_in();
        const NodeVerdict v = filter_node(t->text, cfg, dates);
        if (!v.keep) {
            if (counter) counter->drop(to_string(v.rule));
            continue;
        }
        std::string cleaned = clean_node(t->text);
        if (!post_clean_gate(cleaned, cfg.min_bytes_post_clean)) {
            if (counter) counter->drop("post_clean_5_bytes");
            continue;
        }
        if (!post_clean_gate(cleaned, cfg.min_bytes_post)) {
            if (counter) counter->drop("post_clean_10_bytes");
            continue;
        }
        t->text = std::move(cleaned);
        kept.push_back(std::move(node));
    }
    doc.nodes = std::move(kept);
}

}  // namespace weave
