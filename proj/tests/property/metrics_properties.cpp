#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "weave/metrics.hpp"

using namespace weave;
using namespace weave::props;

namespace {

std::vector<std::vector<double>> random_rows(Rng& rng) {
    const std::size_t n = uniform(rng, 1, 40);
    const std::size_t d = uniform(rng, 1, 12);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows) {
        do {
            for (auto& x : r) x = uniform(rng, 0, 4) == 0 ? 0.0 : uniform01(rng) * 2 - 1;
        } while (std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; }));
    }
    // Some batches repeat rows to push the score toward 1.
    if (uniform(rng, 0, 3) == 0) {
        for (auto& r : rows) r = rows[0];
    }
    return rows;
}

}  // namespace

TEST(MetricsProperties, VendiBoundsPermutationAndTrace) {
    Rng rng(kSeed);
    for (int i = 0; i < 300; ++i) {
        auto rows = random_rows(rng);
        const double vs = vendi_score(rows);
        EXPECT_GE(vs, 1.0 - 1e-9);
        EXPECT_LE(vs, static_cast<double>(rows.size()) + 1e-9);
        double trace = 0;
        for (double l : vendi_spectrum(rows)) trace += l;
        EXPECT_NEAR(trace, 1.0, 1e-9);
        std::shuffle(rows.begin(), rows.end(), rng);
        EXPECT_NEAR(vendi_score(rows), vs, 1e-9);
    }
}

TEST(MetricsProperties, NgramRatiosBoundedAndDuplicationNeverIncreases) {
    Rng rng(kSeed + 1);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> texts;
        for (std::size_t k = 0, n = uniform(rng, 1, 6); k < n; ++k) {
            std::string t;
            for (std::size_t w = 0, m = uniform(rng, 0, 15); w < m; ++w) t += wt::random_string(rng, "abcAB", uniform(rng, 1, 2)) + " ";
            texts.push_back(t);
        }
        const auto base = distinct_ngram_ratio(texts);
        std::vector<std::string> doubled = texts;
        doubled.insert(doubled.end(), texts.begin(), texts.end());
        const auto dup = distinct_ngram_ratio(doubled);
        for (std::size_t n = 0; n < base.ratio.size(); ++n) {
            ASSERT_EQ(base.ratio[n].has_value(), dup.ratio[n].has_value());
            if (!base.ratio[n]) continue;
            EXPECT_GT(*base.ratio[n], 0.0);
            EXPECT_LE(*base.ratio[n], 1.0);
            EXPECT_LE(*dup.ratio[n], *base.ratio[n]);
        }
    }
}

TEST(MetricsProperties, HistogramsConserveTotals) {
    Rng rng(kSeed + 2);
    for (int i = 0; i < 300; ++i) {
        std::vector<DistRecord> recs;
        for (std::size_t k = 0, n = uniform(rng, 0, 200); k < n; ++k) {
            recs.push_back({DocId{}, uniform(rng, 0, 5000), uniform(rng, 0, 40), uniform(rng, 0, 1) ? "a" : "b"});
        }
        const auto d = distributions(recs, uniform(rng, 1, 100), uniform(rng, 1, 5));
        EXPECT_EQ(d.tokens.total(), recs.size());
        EXPECT_EQ(d.images.total(), recs.size());
        std::uint64_t joint = 0;
        for (const auto& [k, c] : d.joint) joint += c;
        EXPECT_EQ(joint, recs.size());
        std::uint64_t langs = 0;
        for (const auto& [k, c] : d.docs_per_lang) langs += c;
        EXPECT_EQ(langs, recs.size());
    }
}
