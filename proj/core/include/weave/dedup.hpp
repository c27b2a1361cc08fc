#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "weave/document.hpp"
#include "weave/hashing.hpp"
#include "weave/minhash.hpp"

namespace weave {

class StageCounter;

/// Unit-cost edit distance over Unicode scalars.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Edit distance where substitutions cost 2 (insertions + deletions only).
std::size_t indel_distance(std::u32string_view a, std::u32string_view b);

enum class LevConvention {
    max_len,  // 1 - dist / max(|a|, |b|)
    indel,    // 1 - indel_dist / (|a| + |b|)
};

double lev_ratio(std::u32string_view a, std::u32string_view b, LevConvention conv = LevConvention::max_len);
double lev_ratio(std::string_view a, std::string_view b, LevConvention conv = LevConvention::max_len);

struct NodeDedupConfig {
    double threshold = 0.95;
    LevConvention convention = LevConvention::max_len;
};

/// Drops exact-duplicate text nodes, then drops any text node whose ratio to
/// an earlier surviving text node reaches the threshold. Image nodes and the
/// order of survivors are untouched.
void node_dedup(Document& doc, const NodeDedupConfig& cfg = {}, StageCounter* counter = nullptr);

/// Keep-first exact dedup on the newline-joined text, one key space per language.
class ExactDocDeduper {
public:
    /// Returns true when the document is the first with its text in its language.
    bool keep(const Document& doc);
    std::size_t size() const;

private:
    std::map<std::string, std::set<Sha256Digest>> seen_;
};

struct LshDedupConfig {
    double threshold = 0.8;
    std::size_t num_perm = 256;
    std::uint64_t num_features = 1ULL << 21;
    std::uint64_t seed = 1;
};

/// Per-language MinHashLSH. Only kept documents enter the index.
class NearDupDeduper {
public:
    explicit NearDupDeduper(const LshDedupConfig& cfg = {});

    Signature signature(const Document& doc) const;
    /// `sig` must come from signature(); split out so signatures can be
    /// computed in parallel and inserted in stream order.
    bool keep(const std::string& lang, const DocId& id, const Signature& sig);
    bool keep(const Document& doc) { return keep(doc.lang.value_or(""), doc.id, signature(doc)); }

    LshParams params() const { return params_; }
    const LshDedupConfig& config() const { return cfg_; }

private:
    LshDedupConfig cfg_;
    MinHasher hasher_;
    LshParams params_;
    std::map<std::string, std::unique_ptr<LshIndex>> indexes_;
};

/// Stream form: returns the ids to drop, in stream order.
std::vector<DocId> lsh_dedup(const std::vector<std::pair<DocId, Signature>>& stream, LshParams params,
                             std::size_t num_perm);

}  // namespace weave
