#include "weave/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "weave/utf8.hpp"

namespace weave::html {

namespace {

const std::unordered_set<std::string_view> kVoid = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen",
    "link", "meta", "param", "source", "track", "wbr"};

// Content up to the matching end tag is not parsed as markup.
const std::unordered_set<std::string_view> kRawText = {
    "script", "style", "xmp", "iframe", "noembed", "noframes", "noscript", "textarea", "title"};

// Only these raw-text elements have their character references decoded.
const std::unordered_set<std::string_view> kEscapableRaw = {"textarea", "title"};

// Opening any of these closes an open <p>.
const std::unordered_set<std::string_view> kClosesP = {
    "address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div", "dl",
    "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
    "header", "hgroup", "hr", "li", "main", "menu", "nav", "ol", "p", "pre", "section", "table", "ul",
    "dd", "dt"};

const std::unordered_set<std::string_view> kHeadings = {"h1", "h2", "h3", "h4", "h5", "h6"};

const std::unordered_set<std::string_view> kInline = {
    "a", "abbr", "b", "bdi", "bdo", "big", "cite", "code", "data", "del", "dfn", "em", "font", "i",
    "ins", "kbd", "label", "mark", "q", "s", "samp", "small", "span", "strike", "strong", "sub",
    "sup", "time", "tt", "u", "var", "wbr", "nobr"};

const std::unordered_map<std::string_view, char32_t>& named_entities() {
    static const std::unordered_map<std::string_view, char32_t> kMap = {
        {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}, {"nbsp", 0xA0},
        {"copy", 0xA9}, {"reg", 0xAE}, {"trade", 0x2122}, {"hellip", 0x2026}, {"mdash", 0x2014},
        {"ndash", 0x2013}, {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"sbquo", 0x201A}, {"ldquo", 0x201C},
        {"rdquo", 0x201D}, {"bdquo", 0x201E}, {"laquo", 0xAB}, {"raquo", 0xBB}, {"bull", 0x2022},
        {"middot", 0xB7}, {"deg", 0xB0}, {"euro", 0x20AC}, {"pound", 0xA3}, {"yen", 0xA5}, {"cent", 0xA2},
        {"sect", 0xA7}, {"para", 0xB6}, {"times", 0xD7}, {"divide", 0xF7}, {"plusmn", 0xB1},
        {"frac12", 0xBD}, {"frac14", 0xBC}, {"frac34", 0xBE}, {"iexcl", 0xA1}, {"iquest", 0xBF},
        {"shy", 0xAD}, {"ensp", 0x2002}, {"emsp", 0x2003}, {"thinsp", 0x2009}, {"zwnj", 0x200C},
        {"zwj", 0x200D}, {"le", 0x2264}, {"ge", 0x2265}, {"ne", 0x2260}, {"larr", 0x2190},
        {"rarr", 0x2192}, {"uarr", 0x2191}, {"darr", 0x2193}, {"hearts", 0x2665}, {"dagger", 0x2020},
        {"Agrave", 0xC0}, {"Aacute", 0xC1}, {"Acirc", 0xC2}, {"Atilde", 0xC3}, {"Auml", 0xC4},
        {"Aring", 0xC5}, {"AElig", 0xC6}, {"Ccedil", 0xC7}, {"Egrave", 0xC8}, {"Eacute", 0xC9},
        {"Ecirc", 0xCA}, {"Euml", 0xCB}, {"Igrave", 0xCC}, {"Iacute", 0xCD}, {"Icirc", 0xCE},
        {"Iuml", 0xCF}, {"ETH", 0xD0}, {"Ntilde", 0xD1}, {"Ograve", 0xD2}, {"Oacute", 0xD3},
        {"Ocirc", 0xD4}, {"Otilde", 0xD5}, {"Ouml", 0xD6}, {"Oslash", 0xD8}, {"Ugrave", 0xD9},
        {"Uacute", 0xDA}, {"Ucirc", 0xDB}, {"Uuml", 0xDC}, {"Yacute", 0xDD}, {"THORN", 0xDE},
        {"szlig", 0xDF}, {"agrave", 0xE0}, {"aacute", 0xE1}, {"acirc", 0xE2}, {"atilde", 0xE3},
        {"auml", 0xE4}, {"aring", 0xE5}, {"aelig", 0xE6}, {"ccedil", 0xE7}, {"egrave", 0xE8},
        {"eacute", 0xE9}, {"ecirc", 0xEA}, {"euml", 0xEB}, {"igrave", 0xEC}, {"iacute", 0xED},
        {"icirc", 0xEE}, {"iuml", 0xEF}, {"eth", 0xF0}, {"ntilde", 0xF1}, {"ograve", 0xF2},
        {"oacute", 0xF3}, {"ocirc", 0xF4}, {"otilde", 0xF5}, {"ouml", 0xF6}, {"oslash", 0xF8},
        {"ugrave", 0xF9}, {"uacute", 0xFA}, {"ucirc", 0xFB}, {"uuml", 0xFC}, {"yacute", 0xFD},
        {"thorn", 0xFE}, {"yuml", 0xFF}, {"OElig", 0x152}, {"oelig", 0x153}, {"Scaron", 0x160},
        {"scaron", 0x161}, {"Yuml", 0x178}, {"circ", 0x2C6}, {"tilde", 0x2DC}, {"alpha", 0x3B1},
        {"beta", 0x3B2}, {"gamma", 0x3B3}, {"delta", 0x3B4}, {"pi", 0x3C0}, {"mu", 0x3BC},
        {"sigma", 0x3C3}, {"omega", 0x3C9}, {"infin", 0x221E}, {"minus", 0x2212}};
    return kMap;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

class TreeBuilder {
public:
    explicit TreeBuilder(std::string_view src) : src_(src) {
        root_ = std::make_unique<Node>();
        root_->name = "#document";
        stack_.push_back(root_.get());
    }

    std::unique_ptr<Node> build() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                if (!markup()) text_until_tag();
            } else {
                text_until_tag();
            }
        }
        flush_text();
        return std::move(root_);
    }

private:
    Node* current() { return stack_.back(); }

    void flush_text() {
        if (pending_text_.empty()) return;
        Node* parent = current();
        if (!parent->children.empty() && !parent->children.back()->is_element()) {
            parent->children.back()->text += decode_entities(pending_text_);
        } else {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::text;
            n->text = decode_entities(pending_text_);
            parent->children.push_back(std::move(n));
        }
        pending_text_.clear();
    }

    void text_until_tag() {
        const std::size_t start = pos_;
        const std::size_t next = src_.find('<', pos_ + 1);
        pos_ = next == std::string_view::npos ? src_.size() : next;
        pending_text_.append(src_.substr(start, pos_ - start));
    }

    // Returns false when '<' does not begin markup (it is then literal text).
    bool markup() {
        const std::string_view rest = src_.substr(pos_);
        if (rest.starts_with("<!--")) {
            flush_text();
            const auto end = src_.find("-->", pos_ + 4);
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return true;
        }
        if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
            flush_text();
            if (rest.starts_with("<![CDATA[")) {
                const auto end = src_.find("]]>", pos_);
                const std::size_t stop = end == std::string_view::npos ? src_.size() : end;
                pending_text_.append(src_.substr(pos_ + 9, stop - pos_ - 9));
                pos_ = end == std::string_view::npos ? src_.size() : end + 3;
                return true;
            }
            const auto end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return true;
        }
        if (rest.size() >= 2 && rest[1] == '/') {
            if (rest.size() < 3 || !std::isalpha(static_cast<unsigned char>(rest[2]))) {
                if (rest.size() >= 3 && rest[2] == '>') {
                    pos_ += 3;
                    return true;
                }
                return false;
            }
            flush_text();
            pos_ += 2;
            const std::string name = read_name();
            const auto end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            end_tag(name);
            return true;
        }
        if (rest.size() < 2 || !std::isalpha(static_cast<unsigned char>(rest[1]))) return false;

        flush_text();
        ++pos_;
        auto el = std::make_unique<Node>();
        el->name = read_name();
        bool self_closing = false;
        read_attributes(*el, self_closing);
        start_tag(std::move(el), self_closing);
        return true;
    }

    std::string read_name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>' && src_[pos_] != '/') ++pos_;
        return lower_ascii(src_.substr(start, pos_ - start));
    }

    void read_attributes(Node& el, bool& self_closing) {
        while (pos_ < src_.size()) {
            while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
            if (pos_ >= src_.size()) return;
            if (src_[pos_] == '>') {
                ++pos_;
                return;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    self_closing = true;
                    ++pos_;
                    return;
                }
                continue;
            }
            const std::size_t name_start = pos_;
            while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>' && src_[pos_] != '=' &&
                   !(src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>')) {
                ++pos_;
            }
            std::string name = lower_ascii(src_.substr(name_start, pos_ - name_start));
            if (name.empty()) {
                ++pos_;
                continue;
            }
            while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    const char quote = src_[pos_++];
                    const auto end = src_.find(quote, pos_);
                    const std::size_t stop = end == std::string_view::npos ? src_.size() : end;
                    value = decode_entities(src_.substr(pos_, stop - pos_));
                    pos_ = end == std::string_view::npos ? src_.size() : end + 1;
                } else {
                    const std::size_t vstart = pos_;
                    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
                    value = decode_entities(src_.substr(vstart, pos_ - vstart));
                }
            }
            const bool dup = std::any_of(el.attrs.begin(), el.attrs.end(), [&](const auto& a) { return a.first == name; });
            if (!dup) el.attrs.emplace_back(std::move(name), std::move(value));
        }
    }

    bool in_stack(std::string_view name, std::initializer_list<std::string_view> boundaries = {}) const {
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
            if ((*it)->name == name) return true;
            for (auto b : boundaries) {
                if ((*it)->name == b) return false;
            }
        }
        return false;
    }

    void pop_until(std::string_view name) {
        while (stack_.size() > 1) {
            const bool hit = current()->name == name;
            stack_.pop_back();
            if (hit) return;
        }
    }

    void close_implied(const std::string& name) {
        if (kClosesP.contains(name) && in_stack("p", {"table", "td", "th", "button", "caption"})) pop_until("p");
        if (name == "li" && in_stack("li", {"ul", "ol", "menu", "table"})) pop_until("li");
        if (name == "dd" || name == "dt") {
            for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
                const auto& n = (*it)->name;
                if (n == "dd" || n == "dt") {
                    pop_until(n);
                    break;
                }
                if (n == "dl" || n == "table") break;
            }
        }
        if (kHeadings.contains(name) && kHeadings.contains(current()->name)) stack_.pop_back();
        if (name == "option" && current()->name == "option") stack_.pop_back();
        if (name == "td" || name == "th") {
            for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
                const auto& n = (*it)->name;
                if (n == "td" || n == "th") {
                    pop_until(n);
                    break;
                }
                if (n == "tr" || n == "table") break;
            }
        }
        if (name == "tr" && in_stack("tr", {"table"})) pop_until("tr");
        if ((name == "tbody" || name == "thead" || name == "tfoot")) {
            for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
                const auto& n = (*it)->name;
                if (n == "tbody" || n == "thead" || n == "tfoot") {
                    pop_until(n);
                    break;
                }
                if (n == "table") break;
            }
        }
    }

    void start_tag(std::unique_ptr<Node> el, bool self_closing) {
        const std::string name = el->name;
        close_implied(name);
        Node* raw = el.get();
        current()->children.push_back(std::move(el));

        if (kVoid.contains(name) || self_closing) return;

        if (kRawText.contains(name)) {
            const std::string close = "</" + name;
            std::size_t end = pos_;
            for (;;) {
                end = src_.find("</", end);
                if (end == std::string_view::npos) break;
                if (end + close.size() <= src_.size() && lower_ascii(src_.substr(end, close.size())) == close) break;
                end += 2;
            }
            const std::size_t stop = end == std::string_view::npos ? src_.size() : end;
            if (stop > pos_) {
                auto t = std::make_unique<Node>();
                t->kind = Node::Kind::text;
                const auto body = src_.substr(pos_, stop - pos_);
                t->text = kEscapableRaw.contains(name) ? decode_entities(body) : std::string(body);
                raw->children.push_back(std::move(t));
            }
            if (end == std::string_view::npos) {
                pos_ = src_.size();
            } else {
                const auto gt = src_.find('>', end);
                pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
            }
            return;
        }

        if (stack_.size() < kMaxDepth) stack_.push_back(raw);
    }

    void end_tag(const std::string& name) {
        if (name == "br") {
            auto br = std::make_unique<Node>();
            br->name = "br";
            current()->children.push_back(std::move(br));
            return;
        }
        if (in_stack(name)) pop_until(name);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::unique_ptr<Node> root_;
    std::vector<Node*> stack_;
    std::string pending_text_;
};

}  // namespace

const std::string* Node::attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
        if (k == key) return &v;
    }
    return nullptr;
}

Document Document::parse(std::string_view html) {
    Document doc;
    doc.root_ = TreeBuilder(html).build();
    return doc;
}

bool is_inline_element(std::string_view name) { return kInline.contains(name); }

std::string decode_entities(std::string_view s) {
    if (s.find('&') == std::string_view::npos) return std::string(s);
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (i + 1 < s.size() && s[i + 1] == '#') {
            std::size_t j = i + 2;
            int base = 10;
            if (j < s.size() && (s[j] == 'x' || s[j] == 'X')) {
                base = 16;
                ++j;
            }
            std::uint32_t cp = 0;
            const std::size_t digits_start = j;
            while (j < s.size() && j - digits_start < 8 &&
                   (base == 16 ? std::isxdigit(static_cast<unsigned char>(s[j])) : std::isdigit(static_cast<unsigned char>(s[j])))) {
                const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[j])));
                cp = cp * static_cast<std::uint32_t>(base) + static_cast<std::uint32_t>(c <= '9' ? c - '0' : c - 'a' + 10);
                ++j;
            }
            if (j == digits_start) {
                out.push_back(s[i++]);
                continue;
            }
            if (j < s.size() && s[j] == ';') ++j;
            if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = utf8::kReplacement;
            utf8::append(out, static_cast<char32_t>(cp));
            i = j;
            continue;
        }
        if (semi != std::string_view::npos && semi - i <= 10) {
            const auto name = s.substr(i + 1, semi - i - 1);
            const auto& table = named_entities();
            if (auto it = table.find(name); it != table.end()) {
                utf8::append(out, it->second);
                i = semi + 1;
                continue;
            }
        }
        // Legacy forms without ';'.
        bool matched = false;
        for (std::string_view legacy : {"amp", "lt", "gt", "quot", "nbsp"}) {
            if (s.substr(i + 1, legacy.size()) == legacy) {
                utf8::append(out, named_entities().at(legacy));
                i += 1 + legacy.size();
                matched = true;
                break;
            }
        }
        if (!matched) out.push_back(s[i++]);
    }
    return out;
}

std::optional<std::string> sniff_meta_charset(std::string_view raw) {
    const std::string head = lower_ascii(raw.substr(0, 4096));
    std::size_t pos = 0;
    while ((pos = head.find("<meta", pos)) != std::string::npos) {
        const auto end = head.find('>', pos);
        const std::string_view tag = std::string_view(head).substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        if (auto cs = tag.find("charset"); cs != std::string_view::npos) {
            std::size_t v = cs + 7;
            while (v < tag.size() && (is_space(tag[v]) || tag[v] == '=' || tag[v] == '"' || tag[v] == '\'')) ++v;
            std::size_t e = v;
            while (e < tag.size() && (std::isalnum(static_cast<unsigned char>(tag[e])) || tag[e] == '-' || tag[e] == '_' ||
                                      tag[e] == ':' || tag[e] == '.')) {
                ++e;
            }
            if (e > v) return std::string(tag.substr(v, e - v));
        }
        pos += 5;
    }
    return std::nullopt;
}

}  // namespace weave::html
