#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "weave/document.hpp"
#include "weave/scorer.hpp"

namespace weave {

struct JointFilterConfig {
    int negatives = 63;
    int top = 8;
    std::size_t pool_cap = 10000;
    std::uint64_t seed = 7;
    double length_tolerance = 0.5;
    bool two_pass = false;
    std::size_t min_doc_bytes = 100;
};

/// Rank threshold for `k` available negatives: `top` when the pool is full,
/// otherwise ceil(top * (k + 1) / (negatives + 1)).
int rank_threshold(int available, const JointFilterConfig& cfg);

double cosine(const Embedding& a, const Embedding& b);
/// L2-normalizes in place; throws on non-finite or zero vectors.
void normalize(Embedding& v);

struct PairDecision {
    std::size_t node_index = 0;     // position in Document::nodes
    bool valid = false;
    int best_rank = 0;
    std::size_t partner_index = 0;  // position of the best partner in Document::nodes
};

struct RankResult {
    int best_rank = 0;
    std::size_t partner = 0;  // index into `partners`
};

/// rank(partner) = 1 + number of negatives scoring strictly above it; returns
/// the best (smallest) rank over partners, first partner on ties.
RankResult best_rank(const Embedding& query, const std::vector<const Embedding*>& partners,
                     const std::vector<const Embedding*>& negatives);

/// Per-node embeddings aligned with Document::nodes (text nodes and images).
struct DocEmbeddings {
    std::vector<std::optional<Embedding>> by_node;
};

using ImagePathFn = std::function<std::string(const ImageNode&)>;

/// Embeds every text node and image; vectors are re-normalized. Throws
/// weave::Error carrying the scorer message when any item fails.
DocEmbeddings embed_document(const Document& doc, Scorer& scorer, const ImagePathFn& image_path);

/// Per-language reservoirs of paragraph and image embeddings from the stream.
class NegativePool {
public:
    struct TextEntry {
        DocId doc;
        std::size_t bytes = 0;
        Embedding emb;
    };
    struct ImageEntry {
        DocId doc;
        Embedding emb;
    };

    NegativePool(std::size_t cap, std::uint64_t seed) : cap_(cap), seed_(seed) {}

    void add(const Document& doc, const DocEmbeddings& emb);

    /// Up to `k` image embeddings from other documents, sampled without replacement.
    std::vector<const Embedding*> sample_images(const std::string& lang, const DocId& exclude, std::size_t k,
                                                std::mt19937_64& rng) const;
    /// Up to `k` paragraph embeddings from other documents whose byte length is
    /// within `tolerance` of `mean_bytes`; when fewer than `k` qualify, the `k`
    /// closest by length difference.
    std::vector<const Embedding*> sample_texts(const std::string& lang, const DocId& exclude, std::size_t k,
                                               double mean_bytes, double tolerance, std::mt19937_64& rng) const;

    std::size_t text_count(const std::string& lang) const;
    std::size_t image_count(const std::string& lang) const;

private:
    struct Lang {
        std::vector<TextEntry> texts;
        std::vector<ImageEntry> images;
        std::uint64_t texts_seen = 0;
        std::uint64_t images_seen = 0;
        std::mt19937_64 rng;
    };
    Lang& lang_state(const std::string& lang);

    std::size_t cap_;
    std::uint64_t seed_;
    std::map<std::string, Lang> langs_;
};

struct DocDecisions {
    std::vector<PairDecision> texts;
    std::vector<PairDecision> images;
};

/// Judges every text node against the document's images and every image
/// against its text nodes, using one negative sample per document.
DocDecisions judge_document(const Document& doc, const DocEmbeddings& emb, const NegativePool& pool,
                            const JointFilterConfig& cfg);

/// Removes invalid nodes (order preserved). Returns a drop reason when the
/// survivor has no images ("no_images"), no text ("no_text"), or at most
/// `min_doc_bytes` of text ("too_small_bytes").
std::optional<std::string> apply_joint_filter(Document& doc, const DocDecisions& decisions,
                                              const JointFilterConfig& cfg);

/// Seed for a document's negative sampler.
std::uint64_t document_seed(std::uint64_t seed, const DocId& id);

}  // namespace weave
