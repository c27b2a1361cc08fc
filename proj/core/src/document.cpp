#include "weave/document.hpp"

#include <charconv>
#include <cstdio>

#include "weave/error.hpp"
#include "weave/hashing.hpp"
#include "weave/utf8.hpp"

namespace weave {

using ojson = nlohmann::ordered_json;

DocId DocId::from_record(std::string_view record_id, std::string_view url) {
    std::string key;
    key.reserve(record_id.size() + url.size() + 1);
    key.append(record_id);
    key.push_back('\0');
    key.append(url);
    const auto digest = sha256(key);
    DocId id;
    std::copy_n(digest.begin(), id.bytes.size(), id.bytes.begin());
    return id;
}

DocId DocId::from_hex(std::string_view hex) {
    if (hex.size() != 32) throw Error("document id must be 32 hex digits");
    DocId id;
    for (std::size_t i = 0; i < 16; ++i) {
        unsigned v = 0;
        const auto* first = hex.data() + 2 * i;
        const auto [ptr, ec] = std::from_chars(first, first + 2, v, 16);
        if (ec != std::errc() || ptr != first + 2) throw Error("bad hex in document id");
        id.bytes[i] = static_cast<std::uint8_t>(v);
    }
    return id;
}

std::string DocId::hex() const { return to_hex(bytes); }

std::size_t Document::text_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += is_text(node) ? 1 : 0;
    return n;
}

std::size_t Document::image_count() const { return nodes.size() - text_count(); }

std::string joined_text(const Document& doc) {
    std::string out;
    bool first = true;
    for (const auto& node : doc.nodes) {
        if (const auto* t = std::get_if<TextNode>(&node)) {
            if (!first) out.push_back('\n');
            out += t->text;
            first = false;
        }
    }
    return out;
}

std::size_t doc_text_bytes(const Document& doc) {
    std::size_t bytes = 0;
    std::size_t count = 0;
    for (const auto& node : doc.nodes) {
        if (const auto* t = std::get_if<TextNode>(&node)) {
            bytes += t->text.size();
            ++count;
        }
    }
    return count == 0 ? 0 : bytes + (count - 1);
}

std::size_t doc_text_chars(const Document& doc) {
    std::size_t n = 0;
    for (const auto& node : doc.nodes) {
        if (const auto* t = std::get_if<TextNode>(&node)) n += utf8::length(t->text);
    }
    return n;
}

std::string phash_hex(std::uint64_t phash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(phash));
    return buf;
}

std::uint64_t parse_phash_hex(std::string_view hex) {
    if (hex.size() != 16) throw Error("phash must be 16 hex digits: '" + std::string(hex) + "'");
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size()) throw Error("bad phash hex: '" + std::string(hex) + "'");
    return v;
}

namespace {

void require_utf8(std::string_view s, const char* what) {
    if (!utf8::is_valid(s)) throw Error(std::string("invalid UTF-8 in ") + what);
}

template <typename T>
ojson opt(const std::optional<T>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

}  // namespace

std::string to_jsonl(const Document& doc) {
    require_utf8(doc.source_url, "url");
    ojson j;
    j["id"] = doc.id.hex();
    j["url"] = doc.source_url;
    if (doc.lang) {
        require_utf8(*doc.lang, "lang");
        j["lang"] = *doc.lang;
    } else {
        j["lang"] = nullptr;
    }
    ojson scores = ojson::array();
    for (const auto& [code, score] : doc.lang_scores) scores.push_back(ojson::array({code, score}));
    j["lang_scores"] = std::move(scores);

    ojson nodes = ojson::array();
    for (const auto& node : doc.nodes) {
        ojson n;
        if (const auto* t = std::get_if<TextNode>(&node)) {
            require_utf8(t->text, "text node");
            require_utf8(t->tag, "tag");
            n["kind"] = "text";
            n["tag"] = t->tag;
            n["text"] = t->text;
        } else {
            const auto& im = std::get<ImageNode>(node);
            require_utf8(im.url, "image url");
            n["kind"] = "image";
            n["url"] = im.url;
            n["sha512"] = opt(im.sha512);
            n["phash"] = im.phash ? ojson(phash_hex(*im.phash)) : ojson(nullptr);
            n["width"] = opt(im.width);
            n["height"] = opt(im.height);
        }
        nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);

    ojson meta = ojson::parse(doc.meta.dump());
    if (!doc.stage_flags.empty()) meta["stages"] = doc.stage_flags;
    j["meta"] = std::move(meta);

    for (const auto& [key, value] : doc.extra.items()) j[key] = ojson::parse(value.dump());
    try {
        return j.dump();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("cannot serialize document: ") + e.what());
    }
}

namespace {

template <typename T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

Document from_jsonl(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("document line is not a JSON object");

    try {
        Document doc;
        doc.id = DocId::from_hex(j.at("id").get<std::string>());
        doc.source_url = j.at("url").get<std::string>();
        doc.lang = get_opt<std::string>(j, "lang");
        for (const auto& pair : j.at("lang_scores")) {
            doc.lang_scores.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
        }
        for (const auto& n : j.at("nodes")) {
            const auto kind = n.at("kind").get<std::string>();
            if (kind == "text") {
                doc.nodes.emplace_back(TextNode{n.at("text").get<std::string>(), n.at("tag").get<std::string>()});
            } else if (kind == "image") {
                ImageNode im;
                im.url = n.at("url").get<std::string>();
                im.sha512 = get_opt<std::string>(n, "sha512");
                if (auto ph = get_opt<std::string>(n, "phash")) im.phash = parse_phash_hex(*ph);
                im.width = get_opt<int>(n, "width");
                im.height = get_opt<int>(n, "height");
                doc.nodes.emplace_back(std::move(im));
            } else {
                throw Error("unknown node kind '" + kind + "'");
            }
        }
        if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
            doc.meta = *it;
            if (auto st = doc.meta.find("stages"); st != doc.meta.end()) {
                for (const auto& s : *st) doc.stage_flags.insert(s.get<std::string>());
                doc.meta.erase("stages");
            }
        }
        static const std::set<std::string> kKnown = {"id", "url", "lang", "lang_scores", "nodes", "meta"};
        for (const auto& [key, value] : j.items()) {
            if (!kKnown.contains(key)) doc.extra[key] = value;
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("document schema violation: ") + e.what());
    }
}

}  // namespace weave
