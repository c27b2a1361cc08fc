#include "weave/shard.hpp"

#include <cstdio>

#include "weave/error.hpp"
#include "weave/gzip.hpp"

namespace weave {

std::size_t ShardManifest::documents() const {
    std::size_t n = 0;
    for (const auto& f : files) n += f.documents;
    return n;
}

nlohmann::json ShardManifest::to_json() const {
    nlohmann::ordered_json j;
    j["lang"] = lang;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        nlohmann::ordered_json e;
        e["name"] = f.name;
        e["documents"] = f.documents;
        e["bytes"] = f.bytes;
        j["files"].push_back(std::move(e));
    }
    return nlohmann::json::parse(j.dump());
}

namespace {

std::string shard_name(const std::string& lang, std::size_t seq) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%05zu.jsonl.gz", seq);
    return lang + "/" + lang + buf;
}

}  // namespace

ShardManifest write_shard(std::span<const Document> docs, const std::string& lang,
                          const std::filesystem::path& shard_dir, const ShardOptions& options) {
    ShardManifest manifest;
    manifest.lang = lang;
    if (docs.empty()) return manifest;
    if (options.max_docs_per_file == 0) throw Error("max_docs_per_file must be positive");

    // Serialize up front so schema and purity errors abort before any I/O.
    std::vector<std::string> lines;
    lines.reserve(docs.size());
    for (const auto& doc : docs) {
        if (!doc.lang || *doc.lang != lang) {
            throw Error("document " + doc.id.hex() + " does not belong to shard language " + lang);
        }
        lines.push_back(to_jsonl(doc));
    }

    std::vector<std::filesystem::path> created;
    try {
        std::size_t seq = options.first_seq;
        for (std::size_t begin = 0; begin < lines.size(); begin += options.max_docs_per_file, ++seq) {
            const std::size_t end = std::min(lines.size(), begin + options.max_docs_per_file);
            const std::string name = shard_name(lang, seq);
            const auto path = shard_dir / name;
            GzWriter writer(path);
            for (std::size_t i = begin; i < end; ++i) {
                writer.write(lines[i]);
                writer.write("\n");
            }
            writer.commit();
            created.push_back(path);
            manifest.files.push_back({name, end - begin, std::filesystem::file_size(path)});
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : created) std::filesystem::remove(p, ec);
        throw;
    }
    return manifest;
}

void for_each_document(const std::filesystem::path& path, const std::function<void(Document&&)>& fn) {
    GzReader reader(path);
    std::string line;
    std::size_t lineno = 0;
    for (;;) {
        bool more = false;
        try {
            more = reader.getline(line);
        } catch (const Error& e) {
            throw Error(path.string() + ":" + std::to_string(lineno + 1) + ": " + e.what());
        }
        if (!more) break;
        ++lineno;
        if (line.empty()) continue;
        Document doc;
        try {
            doc = from_jsonl(line);
        } catch (const Error& e) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        fn(std::move(doc));
    }
}

std::vector<Document> read_shard(const std::filesystem::path& path) {
    std::vector<Document> docs;
    for_each_document(path, [&](Document&& d) { docs.push_back(std::move(d)); });
    return docs;
}

void write_documents(const std::filesystem::path& path, std::span<const Document> docs) {
    GzWriter writer(path);
    for (const auto& doc : docs) {
        writer.write(to_jsonl(doc));
        writer.write("\n");
    }
    writer.commit();
}

std::vector<Document> read_documents(const std::filesystem::path& path) { return read_shard(path); }

}  // namespace weave
