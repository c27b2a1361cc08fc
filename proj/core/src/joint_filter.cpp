#include "weave/joint_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weave/error.hpp"
#include "weave/hashing.hpp"

namespace weave {

int rank_threshold(int available, const JointFilterConfig& cfg) {
    if (available >= cfg.negatives) return cfg.top;
    const long num = static_cast<long>(cfg.top) * (available + 1);
    const long den = cfg.negatives + 1;
    return static_cast<int>((num + den - 1) / den);
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) throw Error("embedding dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    return dot;
}

void normalize(Embedding& v) {
    double sq = 0.0;
    for (float x : v) {
        if (!std::isfinite(x)) throw Error("non-finite embedding");
        sq += static_cast<double>(x) * x;
    }
    if (sq == 0.0) throw Error("zero embedding");
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : v) x = static_cast<float>(x * inv);
}

RankResult best_rank(const Embedding& query, const std::vector<const Embedding*>& partners,
                     const std::vector<const Embedding*>& negatives) {
    if (partners.empty()) throw Error("no partners to rank against");
    std::vector<double> neg(negatives.size());
    for (std::size_t j = 0; j < negatives.size(); ++j) neg[j] = cosine(query, *negatives[j]);
    RankResult best{std::numeric_limits<int>::max(), 0};
    for (std::size_t i = 0; i < partners.size(); ++i) {
        const double s = cosine(query, *partners[i]);
        const int rank = 1 + static_cast<int>(std::count_if(neg.begin(), neg.end(), [s](double x) { return x > s; }));
        if (rank < best.best_rank) best = {rank, i};
    }
    return best;
}

DocEmbeddings embed_document(const Document& doc, Scorer& scorer, const ImagePathFn& image_path) {
    std::vector<std::string> texts;
    std::vector<std::string> paths;
    std::vector<std::size_t> text_pos;
    std::vector<std::size_t> image_pos;
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        if (const auto* t = std::get_if<TextNode>(&doc.nodes[i])) {
            texts.push_back(t->text);
            text_pos.push_back(i);
        } else {
            paths.push_back(image_path(std::get<ImageNode>(doc.nodes[i])));
            image_pos.push_back(i);
        }
    }
    DocEmbeddings out;
    out.by_node.resize(doc.nodes.size());
    auto place = [&](std::vector<Scored<Embedding>> results, const std::vector<std::size_t>& pos) {
        if (results.size() != pos.size()) throw Error("scorer returned wrong batch size");
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (!results[i].ok()) throw Error("embedding failed: " + results[i].error);
            normalize(*results[i].value);
            out.by_node[pos[i]] = std::move(*results[i].value);
        }
    };
    if (!texts.empty()) place(scorer.embed_text(texts), text_pos);
    if (!paths.empty()) place(scorer.embed_image(paths), image_pos);
    return out;
}

NegativePool::Lang& NegativePool::lang_state(const std::string& lang) {
    auto it = langs_.find(lang);
    if (it == langs_.end()) {
        it = langs_.emplace(lang, Lang{}).first;
        it->second.rng.seed(mix64(seed_ ^ fnv1a64(lang)));
    }
    return it->second;
}

namespace {

template <typename Entry>
void reservoir_add(std::vector<Entry>& pool, std::uint64_t& seen, std::size_t cap, std::mt19937_64& rng, Entry e) {
    if (pool.size() < cap) {
        pool.push_back(std::move(e));
    } else {
        const std::uint64_t j = rng() % (seen + 1);
        if (j < cap) pool[j] = std::move(e);
    }
    ++seen;
}

// Partial Fisher-Yates: the first k entries of `idx` become a uniform sample.
void sample_prefix(std::vector<std::size_t>& idx, std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k && i + 1 < idx.size(); ++i) {
        const std::size_t j = i + rng() % (idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(k, idx.size()));
}

}  // namespace

void NegativePool::add(const Document& doc, const DocEmbeddings& emb) {
    if (cap_ == 0) return;
    Lang& st = lang_state(doc.lang.value_or(""));
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        if (!emb.by_node.at(i)) continue;
        if (const auto* t = std::get_if<TextNode>(&doc.nodes[i])) {
            reservoir_add(st.texts, st.texts_seen, cap_, st.rng, TextEntry{doc.id, t->text.size(), *emb.by_node[i]});
        } else {
            reservoir_add(st.images, st.images_seen, cap_, st.rng, ImageEntry{doc.id, *emb.by_node[i]});
        }
    }
}

std::vector<const Embedding*> NegativePool::sample_images(const std::string& lang, const DocId& exclude,
                                                          std::size_t k, std::mt19937_64& rng) const {
    const auto it = langs_.find(lang);
    if (it == langs_.end()) return {};
    const auto& pool = it->second.images;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].doc != exclude) idx.push_back(i);
    }
    sample_prefix(idx, k, rng);
    std::vector<const Embedding*> out;
    for (auto i : idx) out.push_back(&pool[i].emb);
    return out;
}

std::vector<const Embedding*> NegativePool::sample_texts(const std::string& lang, const DocId& exclude,
                                                         std::size_t k, double mean_bytes, double tolerance,
                                                         std::mt19937_64& rng) const {
    const auto it = langs_.find(lang);
    if (it == langs_.end()) return {};
    const auto& pool = it->second.texts;
    std::vector<std::size_t> others;
    std::vector<std::size_t> similar;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].doc == exclude) continue;
        others.push_back(i);
        if (std::abs(static_cast<double>(pool[i].bytes) - mean_bytes) <= tolerance * mean_bytes) similar.push_back(i);
    }
    std::vector<std::size_t> chosen;
    if (similar.size() >= k) {
        chosen = std::move(similar);
        sample_prefix(chosen, k, rng);
    } else {
        chosen = std::move(others);
        std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(static_cast<double>(pool[a].bytes) - mean_bytes) <
                   std::abs(static_cast<double>(pool[b].bytes) - mean_bytes);
        });
        chosen.resize(std::min(k, chosen.size()));
    }
    std::vector<const Embedding*> out;
    for (auto i : chosen) out.push_back(&pool[i].emb);
    return out;
}

std::size_t NegativePool::text_count(const std::string& lang) const {
    const auto it = langs_.find(lang);
    return it == langs_.end() ? 0 : it->second.texts.size();
}

std::size_t NegativePool::image_count(const std::string& lang) const {
    const auto it = langs_.find(lang);
    return it == langs_.end() ? 0 : it->second.images.size();
}

std::uint64_t document_seed(std::uint64_t seed, const DocId& id) {
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < id.bytes.size(); i += 8) {
        std::uint64_t part = 0;
        for (std::size_t b = 0; b < 8; ++b) part |= static_cast<std::uint64_t>(id.bytes[i + b]) << (8 * b);
        h = mix64(h ^ part);
    }
    return h;
}

DocDecisions judge_document(const Document& doc, const DocEmbeddings& emb, const NegativePool& pool,
                            const JointFilterConfig& cfg) {
    std::vector<std::size_t> text_pos;
    std::vector<std::size_t> image_pos;
    std::size_t text_bytes = 0;
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        if (const auto* t = std::get_if<TextNode>(&doc.nodes[i])) {
            text_pos.push_back(i);
            text_bytes += t->text.size();
        } else {
            image_pos.push_back(i);
        }
    }
    DocDecisions out;
    if (text_pos.empty() || image_pos.empty()) return out;  // left to the document gate

    auto emb_at = [&](std::size_t i) -> const Embedding& {
        if (!emb.by_node.at(i)) throw Error("missing embedding for node " + std::to_string(i));
        return *emb.by_node[i];
    };

    const std::string lang = doc.lang.value_or("");
    std::mt19937_64 rng(document_seed(cfg.seed, doc.id));
    const auto k = static_cast<std::size_t>(cfg.negatives);
    const auto neg_images = pool.sample_images(lang, doc.id, k, rng);
    const double mean_bytes = static_cast<double>(text_bytes) / static_cast<double>(text_pos.size());
    const auto neg_texts = pool.sample_texts(lang, doc.id, k, mean_bytes, cfg.length_tolerance, rng);

    std::vector<const Embedding*> images;
    for (auto i : image_pos) images.push_back(&emb_at(i));
    std::vector<const Embedding*> texts;
    for (auto i : text_pos) texts.push_back(&emb_at(i));

    const int text_threshold = rank_threshold(static_cast<int>(neg_images.size()), cfg);
    for (auto i : text_pos) {
        const RankResult r = best_rank(emb_at(i), images, neg_images);
        out.texts.push_back({i, r.best_rank <= text_threshold, r.best_rank, image_pos[r.partner]});
    }
    const int image_threshold = rank_threshold(static_cast<int>(neg_texts.size()), cfg);
    for (auto i : image_pos) {
        const RankResult r = best_rank(emb_at(i), texts, neg_texts);
        out.images.push_back({i, r.best_rank <= image_threshold, r.best_rank, text_pos[r.partner]});
    }
    return out;
}

std::optional<std::string> apply_joint_filter(Document& doc, const DocDecisions& decisions,
                                              const JointFilterConfig& cfg) {
    std::vector<bool> drop(doc.nodes.size(), false);
    for (const auto& d : decisions.texts) drop.at(d.node_index) = !d.valid;
    for (const auto& d : decisions.images) drop.at(d.node_index) = !d.valid;
    std::vector<Node> out;
    for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
        if (!drop[i]) out.push_back(std::move(doc.nodes[i]));
    }
    doc.nodes = std::move(out);
    if (doc.image_count() == 0) return "no_images";
    if (doc.text_count() == 0) return "no_text";
    if (doc_text_bytes(doc) <= cfg.min_doc_bytes) return "too_small_bytes";
    return std::nullopt;
}

}  // namespace weave
