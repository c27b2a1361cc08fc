#include "weave/image_filters.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "weave/error.hpp"
#include "weave/gzip.hpp"
#include "weave/phash.hpp"
#include "weave/stats.hpp"
#include "weave/url.hpp"

namespace weave {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

RuleVerdict url_rule_filter(std::string_view url, const ImageRuleConfig& cfg) {
    const Url u = Url::parse(url);
    if (u.scheme.empty() || !u.has_authority || u.host().empty()) return RuleVerdict::dropped("malformed");

    const std::string lowered = ascii_lower(url);
    for (const auto& word : cfg.url_banned_substrings) {
        if (!word.empty() && lowered.find(ascii_lower(word)) != std::string::npos) {
            return RuleVerdict::dropped("banned_substring:" + word);
        }
    }
    std::string_view segment = u.path;
    if (const auto slash = segment.rfind('/'); slash != std::string_view::npos) segment.remove_prefix(slash + 1);
    if (const auto dot = segment.rfind('.'); dot != std::string_view::npos && dot > 0) segment = segment.substr(0, dot);
    const std::string stem = ascii_lower(segment);
    for (const auto& name : cfg.name_banned_exact) {
        if (stem == ascii_lower(name)) return RuleVerdict::dropped("banned_name");
    }
    return RuleVerdict::kept();
}

RuleVerdict geometry_filter(int width, int height, const ImageRuleConfig& cfg) {
    if (width < 1 || height < 1) throw Error("image dimensions must be positive");
    if (std::min(width, height) < cfg.min_side) return RuleVerdict::dropped("too_small");
    const double ratio = static_cast<double>(width) / static_cast<double>(height);
    if (ratio > cfg.aspect_max || ratio < cfg.aspect_min) return RuleVerdict::dropped("aspect");
    return RuleVerdict::kept();
}

std::string_view to_string(SafetyVerdict v) {
    switch (v) {
        case SafetyVerdict::safe: return "safe";
        case SafetyVerdict::nsfw: return "nsfw";
        case SafetyVerdict::csam: return "csam";
    }
    return "unknown";
}

SafetyVerdict nsfw_gate(const ScoreMap& scores, const NsfwThresholds& t) {
    auto get = [&](const char* key) {
        const auto it = scores.find(key);
        if (it == scores.end()) throw Error(std::string("missing safety score: ") + key);
        return it->second;
    };
    const double porn = get("porn");
    const double hentai = get("hentai");
    const double exposed = get("nudenet_exposed_max");
    const double safer_porn = get("safer_porn");
    const double csam = get("safer_csam");
    if (csam > t.csam) return SafetyVerdict::csam;
    if ((porn + hentai > t.porn_hentai_sum && exposed > t.nudenet_exposed) || safer_porn > t.safer_porn) {
        return SafetyVerdict::nsfw;
    }
    return SafetyVerdict::safe;
}

std::size_t dedup_images_in_document(Document& doc, StageCounter* counter) {
    std::unordered_set<std::string> urls;
    std::vector<bool> drop(doc.nodes.size(), false);
    std::size_t removed = 0;
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        const auto* img = std::get_if<ImageNode>(&doc.nodes[i]);
        if (img == nullptr) continue;
        if (!urls.insert(img->url).second) {
            drop[i] = true;
            ++removed;
            if (counter) counter->drop("duplicate_url_in_document");
        }
    }
    std::unordered_set<std::uint64_t> hashes;
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        const auto* img = std::get_if<ImageNode>(&doc.nodes[i]);
        if (img == nullptr || drop[i] || !img->phash) continue;
        if (!hashes.insert(*img->phash).second) {
            drop[i] = true;
            ++removed;
            if (counter) counter->drop("duplicate_phash_in_document");
        }
    }
    std::vector<Node> out;
    out.reserve(doc.nodes.size());
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        if (!drop[i]) out.push_back(std::move(doc.nodes[i]));
    }
    doc.nodes = std::move(out);
    return removed;
}

std::size_t ImageCapIndex::apply(Document& doc, StageCounter* counter) {
    Counts& c = langs_[doc.lang.value_or("")];
    std::vector<Node> out;
    out.reserve(doc.nodes.size());
    std::size_t removed = 0;
    for (auto& node : doc.nodes) {
        auto* img = std::get_if<ImageNode>(&node);
        if (img != nullptr) {
            const bool url_full = c.url[img->url] >= cap_;
            const bool phash_full = img->phash && c.phash[*img->phash] >= cap_;
            if (url_full || phash_full) {
                ++removed;
                if (counter) counter->drop(url_full ? "url_cap" : "phash_cap");
                continue;
            }
            ++c.url[img->url];
            if (img->phash) ++c.phash[*img->phash];
        }
        out.push_back(std::move(node));
    }
    doc.nodes = std::move(out);
    return removed;
}

void image_dedup(std::vector<Document>& docs, std::size_t cap, StageCounter* counter) {
    ImageCapIndex index(cap);
    for (auto& doc : docs) {
        dedup_images_in_document(doc, counter);
        index.apply(doc, counter);
    }
}

ContaminationSet ContaminationSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open contamination set " + path.string());
    std::set<std::uint64_t> hashes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
        if (start == line.size()) continue;
        try {
            hashes.insert(parse_phash_hex(std::string_view(line).substr(start)));
        } catch (const Error& e) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ContaminationSet(std::move(hashes));
}

void ContaminationSet::save(const std::filesystem::path& path) const {
    std::string out;
    for (auto h : hashes_) out += phash_hex(h) + "\n";
    write_file_atomic(path, out);
}

ContaminationBuild build_contamination(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    ContaminationBuild out;
    std::set<std::uint64_t> hashes;
    for (const auto& f : files) {
        try {
            hashes.insert(phash_bytes(read_file(f)));
            ++out.images;
        } catch (const Error&) {
            out.skipped.push_back(f);
        }
    }
    out.set = ContaminationSet(std::move(hashes));
    return out;
}

DecontaminationResult decontaminate(Document& doc, const ContaminationSet& set) {
    DecontaminationResult r;
    if (set.size() == 0) return r;
    const std::size_t before = doc.image_count();
    std::vector<Node> out;
    out.reserve(doc.nodes.size());
    for (auto& node : doc.nodes) {
        const auto* img = std::get_if<ImageNode>(&node);
        if (img != nullptr && img->phash && set.contains(*img->phash)) {
            ++r.removed;
            continue;
        }
        out.push_back(std::move(node));
    }
    doc.nodes = std::move(out);
    r.drop_document = before > 0 && r.removed > 0 && doc.image_count() == 0;
    return r;
}

}  // namespace weave
