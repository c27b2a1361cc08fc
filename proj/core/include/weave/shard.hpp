#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weave/document.hpp"

namespace weave {

struct ShardFile {
    std::string name;  // relative to the shard directory, e.g. "fra/fra_00000.jsonl.gz"
    std::size_t documents = 0;
    std::uintmax_t bytes = 0;  // compressed size on disk
};

struct ShardManifest {
    std::string lang;
    std::vector<ShardFile> files;

    std::size_t documents() const;
    nlohmann::json to_json() const;
};

struct ShardOptions {
    std::size_t max_docs_per_file = 50'000;
    std::size_t first_seq = 0;
};

/// Writes `docs` as `<lang>/<lang>_<seq>.jsonl.gz` files under `shard_dir`.
/// Every document must carry `lang`; any failure removes all files this call
/// created and rethrows.
ShardManifest write_shard(std::span<const Document> docs, const std::string& lang,
                          const std::filesystem::path& shard_dir, const ShardOptions& options = {});

/// Streams documents from a JSONL(.gz) file. Malformed lines raise an error
/// that names the 1-based line number.
void for_each_document(const std::filesystem::path& path, const std::function<void(Document&&)>& fn);

std::vector<Document> read_shard(const std::filesystem::path& path);

/// Unsharded JSONL.gz writer/reader used for intermediate stage outputs.
void write_documents(const std::filesystem::path& path, std::span<const Document> docs);
std::vector<Document> read_documents(const std::filesystem::path& path);

}  // namespace weave
