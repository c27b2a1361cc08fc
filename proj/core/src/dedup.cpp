#include "weave/dedup.hpp"

#include <algorithm>
#include <unordered_set>

#include "weave/error.hpp"
#include "weave/stats.hpp"
#include "weave/utf8.hpp"

namespace weave {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::size_t indel_distance(std::u32string_view a, std::u32string_view b) {
    // |a| + |b| - 2 * LCS
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return a.size() + b.size() - 2 * row[b.size()];
}

double lev_ratio(std::u32string_view a, std::u32string_view b, LevConvention conv) {
    if (a.empty() && b.empty()) return 1.0;
    if (conv == LevConvention::indel) {
        const double total = static_cast<double>(a.size() + b.size());
        return 1.0 - static_cast<double>(indel_distance(a, b)) / total;
    }
    const double longest = static_cast<double>(std::max(a.size(), b.size()));
    return 1.0 - static_cast<double>(levenshtein(a, b)) / longest;
}

double lev_ratio(std::string_view a, std::string_view b, LevConvention conv) {
    return lev_ratio(utf8::decode(a), utf8::decode(b), conv);
}

namespace {

// Upper bound on the ratio from lengths alone; distance is at least the
// length difference under both conventions.
double ratio_upper_bound(std::size_t la, std::size_t lb, LevConvention conv) {
    if (la == 0 && lb == 0) return 1.0;
    const double diff = static_cast<double>(la > lb ? la - lb : lb - la);
    if (conv == LevConvention::indel) return 1.0 - diff / static_cast<double>(la + lb);
    return 1.0 - diff / static_cast<double>(std::max(la, lb));
}

}  // namespace

void node_dedup(Document& doc, const NodeDedupConfig& cfg, StageCounter* counter) {
    std::unordered_set<std::string_view> exact;
    std::vector<bool> drop(doc.nodes.size(), false);
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        const auto* t = std::get_if<TextNode>(&doc.nodes[i]);
        if (t == nullptr) continue;
        if (counter) counter->add_in();
        if (!exact.insert(t->text).second) {
            drop[i] = true;
            if (counter) counter->drop("exact_duplicate");
        }
    }

    std::vector<std::u32string> kept;
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        const auto* t = std::get_if<TextNode>(&doc.nodes[i]);
        if (t == nullptr || drop[i]) continue;
        std::u32string cps = utf8::decode(t->text);
        for (const auto& prev : kept) {
            if (ratio_upper_bound(prev.size(), cps.size(), cfg.convention) < cfg.threshold) continue;
            if (lev_ratio(prev, cps, cfg.convention) >= cfg.threshold) {
                drop[i] = true;
                break;
            }
        }
        if (drop[i]) {
            if (counter) counter->drop("near_duplicate");
        } else {
            kept.push_back(std::move(cps));
        }
    }

    std::vector<Node> out;
    out.reserve(doc.nodes.size());
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        if (!drop[i]) out.push_back(std::move(doc.nodes[i]));
    }
    doc.nodes = std::move(out);
}

bool ExactDocDeduper::keep(const Document& doc) {
    return seen_[doc.lang.value_or("")].insert(sha256(joined_text(doc))).second;
}

std::size_t ExactDocDeduper::size() const {
    std::size_t n = 0;
    for (const auto& [lang, set] : seen_) n += set.size();
    return n;
}

NearDupDeduper::NearDupDeduper(const LshDedupConfig& cfg)
    : cfg_(cfg), hasher_(cfg.num_perm, cfg.seed), params_(optimal_lsh_params(cfg.threshold, cfg.num_perm)) {}

Signature NearDupDeduper::signature(const Document& doc) const {
    FeatureOptions opt;
    opt.num_features = cfg_.num_features;
    return hasher_(feature_set(joined_text(doc), opt));
}

bool NearDupDeduper::keep(const std::string& lang, const DocId& id, const Signature& sig) {
    auto& index = indexes_[lang];
    if (!index) index = std::make_unique<LshIndex>(params_, cfg_.num_perm);
    return index->insert_if_new(id, sig);
}

std::vector<DocId> lsh_dedup(const std::vector<std::pair<DocId, Signature>>& stream, LshParams params,
                             std::size_t num_perm) {
    LshIndex index(params, num_perm);
    std::vector<DocId> dropped;
    for (const auto& [id, sig] : stream) {
        if (!index.insert_if_new(id, sig)) dropped.push_back(id);
    }
    return dropped;
}

}  // namespace weave
