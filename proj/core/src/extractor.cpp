#include "weave/extractor.hpp"

#include <cctype>

#include "weave/html.hpp"
#include "weave/unicode.hpp"
#include "weave/url.hpp"
#include "weave/utf8.hpp"

namespace weave {

namespace {

std::optional<std::string> charset_from_content_type(std::string_view ct) {
    std::string lower(ct);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto pos = lower.find("charset=");
    if (pos == std::string::npos) return std::nullopt;
    std::size_t b = pos + 8;
    while (b < lower.size() && (lower[b] == '"' || lower[b] == '\'')) ++b;
    std::size_t e = b;
    while (e < lower.size() && lower[e] != ';' && lower[e] != '"' && lower[e] != '\'' && !std::isspace(static_cast<unsigned char>(lower[e]))) ++e;
    if (e == b) return std::nullopt;
    return lower.substr(b, e - b);
}

class Walker {
public:
    Walker(const TagPolicy& policy, std::string_view base_url) : policy_(policy), base_url_(base_url) {}

    std::vector<Node> run(const html::Node& root) {
        walk(root, false, 0);
        return std::move(out_);
    }

private:
    void collect_text(const html::Node& n, std::string& acc, std::size_t depth) const {
        if (depth > html::kMaxDepth) return;
        for (const auto& child : n.children) {
            if (!child->is_element()) {
                acc += child->text;
                continue;
            }
            if (policy_.drop_subtrees.contains(child->name)) continue;
            const bool block = !html::is_inline_element(child->name);
            if (block) acc.push_back(' ');
            collect_text(*child, acc, depth + 1);
            if (block) acc.push_back(' ');
        }
    }

    void emit_text(std::string text, const std::string& tag) {
        text = unicode::normalize_whitespace(text);
        if (text.empty()) return;
        out_.emplace_back(TextNode{std::move(text), tag});
    }

    void walk(const html::Node& n, bool inside_text, std::size_t depth) {
        if (depth > html::kMaxDepth) return;
        for (const auto& child : n.children) {
            if (!child->is_element()) continue;
            const std::string& name = child->name;
            if (policy_.drop_subtrees.contains(name)) continue;

            if (name == policy_.image_tag) {
                if (const auto* src = child->attr("src")) {
                    if (auto url = resolve_url(base_url_, *src)) {
                        ImageNode img;
                        img.url = std::move(*url);
                        out_.emplace_back(std::move(img));
                    }
                }
                continue;
            }
            if (name == "meta" && !inside_text && policy_.text_allow.contains("description")) {
                const auto* meta_name = child->attr("name");
                const auto* content = child->attr("content");
                if (meta_name && content && unicode::lower(*meta_name) == "description") emit_text(*content, "description");
                continue;
            }

            bool now_inside = inside_text;
            if (!inside_text && policy_.text_allow.contains(name)) {
                std::string acc;
                collect_text(*child, acc, depth + 1);
                emit_text(std::move(acc), name);
                now_inside = true;
            }
            walk(*child, now_inside, depth + 1);
        }
    }

    const TagPolicy& policy_;
    std::string_view base_url_;
    std::vector<Node> out_;
};

}  // namespace

std::vector<Node> extract_nodes(std::string_view html_text, std::string_view base_url, const TagPolicy& policy) {
    const auto dom = html::Document::parse(html_text);
    return Walker(policy, base_url).run(dom.root());
}

ExtractResult extract_document(const WarcRecordRef& record, const TagPolicy& policy, const ExtractGates& gates) {
    ExtractResult result;
    const auto http = parse_http_response(record.payload);
    if (!http) {
        result.reason = "not_http";
        return result;
    }
    if (http->status < 200 || http->status >= 300) {
        result.reason = "http_status";
        return result;
    }
    if (http->body.size() < gates.min_doc_bytes) {
        result.reason = "too_small";
        return result;
    }

    std::optional<std::string> charset;
    if (const auto* ct = http->header("content-type")) charset = charset_from_content_type(*ct);
    if (!charset) charset = html::sniff_meta_charset(http->body);
    const std::string text = unicode::to_utf8(http->body, charset.value_or("utf-8"));

    Document doc;
    doc.id = DocId::from_record(record.record_id, record.target_uri);
    doc.source_url = utf8::repair(record.target_uri);
    doc.nodes = extract_nodes(text, record.target_uri, policy);
    doc.meta["warc_record_id"] = utf8::repair(record.record_id);

    if (doc.text_count() < gates.min_text_nodes) {
        result.reason = "too_few_text_nodes";
        return result;
    }
    if (doc.image_count() > gates.max_image_nodes) {
        result.reason = "too_many_images";
        return result;
    }
    result.document = std::move(doc);
    return result;
}

}  // namespace weave
