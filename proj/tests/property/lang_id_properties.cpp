#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "weave/lang_id.hpp"

using namespace weave;
using namespace weave::props;

namespace {

const char* kLangs[] = {"eng_Latn", "fra_Latn", "deu_Latn", "spa_Latn", "ita_Latn"};

std::vector<NodePrediction> random_predictions(Rng& rng) {
    std::vector<NodePrediction> out;
    for (std::size_t i = 0, n = uniform(rng, 1, 12); i < n; ++i) {
        NodePrediction p;
        std::vector<std::string> langs(std::begin(kLangs), std::end(kLangs));
        std::shuffle(langs.begin(), langs.end(), rng);
        // Quantized probabilities make exact ties reachable.
        double left = 1.0;
        for (int k = 0; k < 3; ++k) {
            const double prob = std::min(left, static_cast<double>(uniform(rng, 0, 10)) / 10.0);
            p.top3.emplace_back(langs[k], prob);
            left -= prob;
        }
        std::sort(p.top3.begin(), p.top3.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        p.char_count = uniform(rng, 1, 500);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

TEST(LangIdProperties, ScaleInvariance) {
    Rng rng(kSeed);
    for (int i = 0; i < 2000; ++i) {
        auto preds = random_predictions(rng);
        const auto base = aggregate(preds).winner;
        const std::size_t k = uniform(rng, 2, 1000);
        for (auto& p : preds) p.char_count *= k;
        EXPECT_EQ(aggregate(preds).winner, base);
    }
}

TEST(LangIdProperties, PermutationInvariance) {
    Rng rng(kSeed + 1);
    for (int i = 0; i < 2000; ++i) {
        auto preds = random_predictions(rng);
        const auto base = aggregate(preds).winner;
        std::shuffle(preds.begin(), preds.end(), rng);
        EXPECT_EQ(aggregate(preds).winner, base);
    }
}

TEST(LangIdProperties, RaisingWinnerKeepsIt) {
    Rng rng(kSeed + 2);
    for (int i = 0; i < 2000; ++i) {
        auto preds = random_predictions(rng);
        const auto winner = aggregate(preds).winner;
        auto& node = preds[uniform(rng, 0, preds.size() - 1)];
        bool raised = false;
        for (auto& [lang, p] : node.top3) {
            if (lang == winner) {
                p += uniform01(rng);
                raised = true;
            }
        }
        if (!raised) node.top3.back() = {winner, node.top3.back().second + uniform01(rng)};
        std::sort(node.top3.begin(), node.top3.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        EXPECT_EQ(aggregate(preds).winner, winner);
    }
}
