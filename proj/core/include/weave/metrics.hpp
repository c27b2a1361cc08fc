#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weave/document.hpp"
#include "weave/joint_filter.hpp"

namespace weave {

/// exp(-sum l ln l) over the eigenvalues of K/n, K the cosine kernel of the
/// rows. Rows are normalized first; negative eigenvalues are clamped to 0.
/// Throws on empty input, ragged rows, zero rows or non-finite values.
double vendi_score(const std::vector<std::vector<double>>& rows);
/// Eigenvalues of K/n in ascending order (unclamped).
std::vector<double> vendi_spectrum(const std::vector<std::vector<double>>& rows);
/// exp of the Shannon entropy of a spectrum, with 0 ln 0 = 0 and negatives clamped.
double entropy_exp(const std::vector<double>& eigenvalues);

/// Lowercased Unicode-whitespace tokens.
std::vector<std::string> tokenize(std::string_view text);

struct NgramRatios {
    std::vector<std::optional<double>> ratio;  // ratio[n - 1]; nullopt when no n-grams exist
    std::optional<double> mean;                // over the defined ratios
};

/// |unique word n-grams| / |word n-grams| across all texts, for n = 1..max_n.
NgramRatios distinct_ngram_ratio(const std::vector<std::string>& texts, int max_n = 4);

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
};

struct Histogram {
    std::uint64_t bin_width = 1;
    std::map<std::uint64_t, std::uint64_t> counts;  // bin start -> count
    std::optional<Summary> summary;

    std::uint64_t total() const;
    /// "bin_start,bin_end,count" rows; bin_end is exclusive.
    std::string to_csv() const;
};

Histogram make_histogram(const std::vector<std::uint64_t>& values, std::uint64_t bin_width = 1);

struct DistRecord {
    DocId id;
    std::uint64_t tokens = 0;
    std::uint64_t images = 0;
    std::string lang;
};

DistRecord dist_record(const Document& doc);

struct Distributions {
    Histogram tokens;
    Histogram images;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> joint;  // (token bin, image bin) -> count
    std::map<std::string, std::uint64_t> docs_per_lang;
    std::string joint_csv() const;
};

Distributions distributions(const std::vector<DistRecord>& records, std::uint64_t token_bin = 50,
                            std::uint64_t image_bin = 1);

struct OffsetHistogram {
    std::map<long, std::uint64_t> counts;
    std::uint64_t total = 0;
    double share_within(long radius) const;
};

/// offset = position(best partner) - position(node), over all decisions.
OffsetHistogram node_offset_histogram(const std::vector<PairDecision>& decisions);

}  // namespace weave
