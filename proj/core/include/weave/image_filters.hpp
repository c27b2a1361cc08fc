#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weave/document.hpp"
#include "weave/scorer.hpp"

namespace weave {

class StageCounter;

struct ImageRuleConfig {
    int min_side = 150;
    double aspect_min = 1.0 / 3.0;
    double aspect_max = 3.0;
    std::vector<std::string> url_banned_substrings = {"logo", "banner", "button", "widget", "icon", "plugin"};
    std::vector<std::string> name_banned_exact = {"twitter", "facebook", "rss"};
};

struct RuleVerdict {
    bool keep = true;
    std::string reason;

    static RuleVerdict kept() { return {}; }
    static RuleVerdict dropped(std::string r) { return {false, std::move(r)}; }
};

/// Reasons: "banned_substring:<word>", "banned_name", "malformed".
RuleVerdict url_rule_filter(std::string_view url, const ImageRuleConfig& cfg = {});
/// Reasons: "too_small", "aspect". Aspect bounds are inclusive.
RuleVerdict geometry_filter(int width, int height, const ImageRuleConfig& cfg = {});

struct NsfwThresholds {
    double porn_hentai_sum = 0.8;
    double nudenet_exposed = 0.5;
    double safer_porn = 0.8;
    double csam = 0.4;
};

enum class SafetyVerdict { safe, nsfw, csam };
std::string_view to_string(SafetyVerdict v);

/// Needs keys porn, hentai, nudenet_exposed_max, safer_porn, safer_csam;
/// a missing key throws weave::Error. All comparisons are strict.
SafetyVerdict nsfw_gate(const ScoreMap& scores, const NsfwThresholds& t = {});

/// Drops later images repeating an earlier image's URL, then later images
/// repeating an earlier pHash. Returns the number removed.
std::size_t dedup_images_in_document(Document& doc, StageCounter* counter = nullptr);

/// Per-language occurrence caps keyed independently by URL and by pHash,
/// counting documents. Feed documents in stream order.
class ImageCapIndex {
public:
    explicit ImageCapIndex(std::size_t cap = 10) : cap_(cap) {}

    /// Removes images whose URL or pHash already reached the cap in the
    /// document's language, then counts the survivors. Returns the number removed.
    std::size_t apply(Document& doc, StageCounter* counter = nullptr);

private:
    struct Counts {
        std::unordered_map<std::string, std::size_t> url;
        std::unordered_map<std::uint64_t, std::size_t> phash;
    };
    std::size_t cap_;
    std::map<std::string, Counts> langs_;
};

/// Convenience: within-document dedup followed by the cap, over a stream.
void image_dedup(std::vector<Document>& docs, std::size_t cap = 10, StageCounter* counter = nullptr);

/// pHashes of benchmark images. Membership is exact 64-bit equality.
class ContaminationSet {
public:
    ContaminationSet() = default;
    explicit ContaminationSet(std::set<std::uint64_t> hashes) : hashes_(std::move(hashes)) {}

    /// One lowercase hex16 pHash per line; blank lines and '#' comments ignored.
    static ContaminationSet load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    bool contains(std::uint64_t h) const { return hashes_.count(h) != 0; }
    std::size_t size() const { return hashes_.size(); }
    const std::set<std::uint64_t>& hashes() const { return hashes_; }

private:
    std::set<std::uint64_t> hashes_;
};

struct ContaminationBuild {
    ContaminationSet set;
    std::size_t images = 0;
    std::vector<std::filesystem::path> skipped;  // undecodable files
};

/// Hashes every decodable image under `dir`, recursively.
ContaminationBuild build_contamination(const std::filesystem::path& dir);

struct DecontaminationResult {
    std::size_t removed = 0;
    bool drop_document = false;  // the document lost its last image here
};

DecontaminationResult decontaminate(Document& doc, const ContaminationSet& set);

}  // namespace weave
