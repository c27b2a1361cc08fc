#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "weave/dedup.hpp"
#include "weave/extractor.hpp"
#include "weave/fetcher.hpp"
#include "weave/image_filters.hpp"
#include "weave/joint_filter.hpp"
#include "weave/lang_id.hpp"
#include "weave/text_filters.hpp"

namespace weave {

/// Flat `key = value` file. `[section]` headers prefix following keys with
/// `section.`; `#` starts a comment; values may be bare, double-quoted, or
/// `[a, b]` lists. Later assignments win.
class KeyValueFile {
public:
    static KeyValueFile parse(std::string_view text, const std::string& source = "<config>");
    static KeyValueFile load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// WEAVE_TEXT__MIN_CHARS -> text.min_chars (upper-cased, '.' written as "__").
std::string env_name_for_key(std::string_view key, std::string_view prefix = "WEAVE_");

struct PipelineConfig {
    std::vector<std::string> inputs;
    std::string work_dir = "work";
    std::string out_dir = "out";
    std::uint64_t seed = 7;
    int threads = 0;  // 0: hardware concurrency
    bool stub_mode = true;
    std::string sidecar;
    int embed_dim = 64;
    std::vector<std::string> lang_allow;
    std::vector<std::string> lang_deny;

    ExtractGates extract;
    LidOptions lid;
    NodeFilterConfig node;
    std::string nsfw_wordlist;
    std::size_t doc_min_text_nodes = 5;
    std::size_t doc_min_chars = 300;
    NodeDedupConfig node_dedup;
    LshDedupConfig lsh;

    std::string fetch_mode = "http";  // http | directory
    std::string mirror_dir;
    std::string image_store;  // empty: <work_dir>/images
    int fetch_threads = 8;
    FetchPolicy fetch;

    ImageRuleConfig image_rules;
    NsfwThresholds nsfw;
    std::size_t image_cap = 10;
    std::string contamination;

    JointFilterConfig joint;
    std::size_t shard_max_docs = 50'000;

    int plan_dump = 1;
    std::string plan_counts;
    std::size_t plan_top_k = 6;
    std::uint64_t plan_threshold = 1'000'000;

    /// Every key with its current value, rendered in file syntax.
    std::map<std::string, std::string> to_map() const;
    std::string to_text() const;
    /// Strict: unknown keys and malformed values raise ConfigError.
    void apply(const std::map<std::string, std::string>& values);
    void apply_env(std::string_view prefix = "WEAVE_");
    /// Makes path-valued settings absolute against `base`.
    void resolve_paths(const std::filesystem::path& base);
    void validate() const;

    static std::vector<std::string> keys();
    /// Defaults, then the file (paths relative to its directory), then the environment.
    static PipelineConfig load(const std::filesystem::path& path, std::string_view env_prefix = "WEAVE_");
};

/// Languages processed for one dump. Either everything, or everything but
/// an exclusion set.
struct LanguageSelection {
    std::set<std::string> exclude;
    bool allows(const std::string& lang) const { return exclude.count(lang) == 0; }
    bool all() const { return exclude.empty(); }
};

/// Dump 1 takes every language; dump 2 drops the `top_k` largest languages by
/// prior document count; dump 3 and later keep only languages below
/// `threshold`. Empty counts select everything.
std::vector<LanguageSelection> per_language_extraction_plan(std::size_t dumps,
                                                            const std::map<std::string, std::uint64_t>& counts,
                                                            std::size_t top_k = 6,
                                                            std::uint64_t threshold = 1'000'000);

}  // namespace weave
