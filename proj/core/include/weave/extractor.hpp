#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "weave/document.hpp"
#include "weave/warc.hpp"

namespace weave {

/// Which tags produce nodes. Text of an allow-listed element is emitted once,
/// at its outermost allow-listed ancestor.
struct TagPolicy {
    std::set<std::string, std::less<>> text_allow = {"p",     "h1",    "h2", "h3", "h4", "h5", "h6", "title",
                                                     "description", "ul", "ol", "aside", "dl", "dd", "dt"};
    std::string image_tag = "img";
    std::set<std::string, std::less<>> drop_subtrees = {"table", "script", "style", "noscript", "template"};
};

struct ExtractGates {
    std::size_t min_doc_bytes = 500;
    std::size_t min_text_nodes = 3;
    std::size_t max_image_nodes = 30;
};

struct ExtractResult {
    std::optional<Document> document;
    std::string reason;  // set when document is absent
};

/// DFS pre-order nodes of `html` (already UTF-8). Image sources are resolved
/// against `base_url`; unresolvable ones are skipped.
std::vector<Node> extract_nodes(std::string_view html, std::string_view base_url, const TagPolicy& policy);

/// HTTP parse, charset decode, DOM walk, then the size gates:
/// raw HTML body < min_doc_bytes -> too_small, fewer text nodes than
/// min_text_nodes -> too_few_text_nodes, more images than max_image_nodes ->
/// too_many_images.
ExtractResult extract_document(const WarcRecordRef& record, const TagPolicy& policy = {},
                               const ExtractGates& gates = {});

}  // namespace weave
