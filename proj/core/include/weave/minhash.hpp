#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weave/document.hpp"

namespace weave {

inline constexpr std::uint64_t kMersenne61 = (1ULL << 61) - 1;
inline constexpr std::uint64_t kEmptySlot = std::numeric_limits<std::uint64_t>::max();

struct FeatureOptions {
    std::size_t min_n = 4;
    std::size_t max_n = 5;
    std::uint64_t num_features = 1ULL << 21;
};

/// Word-bounded character n-grams hashed into `num_features` buckets. Text is
/// lowercased and split on Unicode whitespace; each word is padded with one
/// space on each side. Sorted and unique.
std::vector<std::uint64_t> feature_set(std::string_view text, const FeatureOptions& opt = {});

/// The raw n-gram strings behind feature_set, in emission order (with repeats).
std::vector<std::string> char_wb_ngrams(std::string_view text, std::size_t min_n, std::size_t max_n);

using Signature = std::vector<std::uint64_t>;

/// Universal-hash MinHash: h_i(x) = (a_i x + b_i) mod (2^61 - 1).
class MinHasher {
public:
    explicit MinHasher(std::size_t num_perm = 256, std::uint64_t seed = 1);

    Signature operator()(const std::vector<std::uint64_t>& features) const;
    std::size_t num_perm() const { return a_.size(); }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> a_;
    std::vector<std::uint64_t> b_;
};

/// Fraction of matching slots.
double estimate_jaccard(const Signature& x, const Signature& y);

struct LshParams {
    std::size_t bands = 0;
    std::size_t rows = 0;
    bool operator==(const LshParams&) const = default;
};

/// Probability that a pair with Jaccard `j` shares at least one band.
double lsh_collision_probability(double j, LshParams p);

/// (b, r) minimizing fp_weight * FP + fn_weight * FN, where FP and FN are the
/// integrals of the S-curve below and above the threshold, with b * r <= num_perm.
LshParams optimal_lsh_params(double threshold, std::size_t num_perm, double fp_weight = 0.5,
                             double fn_weight = 0.5);

/// Banded index. Band keys are the raw bytes of the r slots, so collisions are
/// exact band equality.
class LshIndex {
public:
    LshIndex(LshParams params, std::size_t num_perm);

    /// A member sharing at least one band with `sig`, if any.
    std::optional<DocId> query(const Signature& sig) const;
    void insert(const DocId& id, const Signature& sig);
    /// Inserts `sig` unless it collides; returns true when it was new.
    bool insert_if_new(const DocId& id, const Signature& sig);

    std::size_t size() const { return size_; }
    LshParams params() const { return params_; }

private:
    std::string band_key(const Signature& sig, std::size_t band) const;

    LshParams params_;
    std::size_t num_perm_;
    std::vector<std::unordered_map<std::string, DocId>> tables_;
    std::size_t size_ = 0;
};

}  // namespace weave
