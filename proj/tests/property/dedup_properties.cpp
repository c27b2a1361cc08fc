#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "generators.hpp"
#include "support/oracles.hpp"
#include "weave/dedup.hpp"
#include "weave/utf8.hpp"

using namespace weave;
using namespace weave::props;

namespace {

std::string mutate(Rng& rng, std::string s, std::size_t edits) {
    for (std::size_t i = 0; i < edits && !s.empty(); ++i) {
        const std::size_t pos = uniform(rng, 0, s.size() - 1);
        switch (uniform(rng, 0, 2)) {
            case 0: s[pos] = static_cast<char>('a' + uniform(rng, 0, 25)); break;
            case 1: s.erase(pos, 1); break;
            default: s.insert(pos, 1, static_cast<char>('a' + uniform(rng, 0, 25))); break;
        }
    }
    return s;
}

double oracle_ratio(const std::string& a, const std::string& b) {
    const auto ca = utf8::decode(a);
    const auto cb = utf8::decode(b);
    const std::size_t m = std::max(ca.size(), cb.size());
    return m == 0 ? 1.0 : 1.0 - static_cast<double>(oracle::levenshtein(ca, cb)) / static_cast<double>(m);
}

}  // namespace

TEST(DedupProperties, NearDuplicateKeepsEarliestOfEachCluster) {
    Rng rng(kSeed);
    for (int trial = 0; trial < 5; ++trial) {
        struct Item {
            int cluster;
            Document doc;
        };
        std::vector<Item> stream;
        for (int c = 0; c < 12; ++c) {
            const std::string base = sentence(rng, 150);
            for (std::size_t k = 0, n = uniform(rng, 1, 4); k < n; ++k) {
                const std::string text = k == 0 ? base : mutate(rng, base, uniform(rng, 0, 3));
                stream.push_back({c, wt::make_doc("https://n.test/" + std::to_string(c) + "/" + std::to_string(k),
                                                       {wt::text(text)}, "eng_Latn")});
            }
        }
        std::shuffle(stream.begin(), stream.end(), rng);
        NearDupDeduper dedup;
        std::set<int> seen;
        for (const auto& item : stream) {
            const bool kept = dedup.keep(item.doc);
            if (!seen.count(item.cluster)) {
                EXPECT_TRUE(kept) << "first member of cluster " << item.cluster;
                seen.insert(item.cluster);
            } else {
                EXPECT_FALSE(kept) << "later member of cluster " << item.cluster;
            }
        }
    }
}

TEST(DedupProperties, DropSetIndependentOfSignatureThreads) {
    Rng rng(kSeed + 1);
    std::vector<Document> docs;
    for (int i = 0; i < 120; ++i) {
        const std::string base = sentence(rng, 80);
        docs.push_back(wt::make_doc("https://t.test/" + std::to_string(i), {wt::text(base)}, "eng_Latn"));
        if (uniform(rng, 0, 2) == 0) {
            docs.push_back(wt::make_doc("https://t.test/d" + std::to_string(i), {wt::text(mutate(rng, base, 2))}, "eng_Latn"));
        }
    }
    NearDupDeduper probe;
    std::vector<std::pair<DocId, Signature>> serial;
    for (const auto& d : docs) serial.emplace_back(d.id, probe.signature(d));

    std::vector<std::pair<DocId, Signature>> parallel(docs.size());
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < 4; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < docs.size(); i += 4) parallel[i] = {docs[i].id, probe.signature(docs[i])};
        });
    }
    for (auto& t : workers) t.join();

    const auto a = lsh_dedup(serial, probe.params(), 256);
    const auto b = lsh_dedup(parallel, probe.params(), 256);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(lsh_dedup(serial, probe.params(), 256), a);
}

TEST(DedupProperties, LevRatioSymmetryAndIdentity) {
    Rng rng(kSeed + 2);
    for (int i = 0; i < 3000; ++i) {
        const std::string a = wt::random_utf8(rng, uniform(rng, 0, 40));
        const std::string b = uniform(rng, 0, 1) ? wt::random_utf8(rng, uniform(rng, 0, 40)) : a.substr(0, a.size() / 2);
        if (!utf8::is_valid(b)) continue;
        for (auto conv : {LevConvention::max_len, LevConvention::indel}) {
            const double ab = lev_ratio(a, b, conv);
            EXPECT_EQ(ab, lev_ratio(b, a, conv));
            EXPECT_EQ(lev_ratio(a, a, conv), 1.0);
            EXPECT_GE(ab, 0.0);
            EXPECT_LE(ab, 1.0);
        }
    }
}

TEST(DedupProperties, NodeDedupSurvivorsAreFarApartAndDropsHaveEarlierTwin) {
    Rng rng(kSeed + 3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> pool;
        for (int k = 0; k < 3; ++k) pool.push_back(sentence(rng, uniform(rng, 3, 12)));
        std::vector<Node> nodes;
        std::vector<std::string> texts;
        for (std::size_t i = 0, n = uniform(rng, 1, 14); i < n; ++i) {
            const std::string& base = pool[uniform(rng, 0, pool.size() - 1)];
            const std::string t = uniform(rng, 0, 2) == 0 ? base : mutate(rng, base, uniform(rng, 0, 2));
            if (t.empty()) continue;
            nodes.emplace_back(wt::text(t));
            texts.push_back(t);
            if (uniform(rng, 0, 3) == 0) nodes.emplace_back(wt::image("https://i.test/" + std::to_string(i) + ".png"));
        }
        Document doc = wt::make_doc("https://nd.test/", nodes);
        const std::size_t images = doc.image_count();
        node_dedup(doc);
        EXPECT_EQ(doc.image_count(), images);

        std::vector<std::string> kept;
        for (const auto& n : doc.nodes) {
            if (const auto* t = std::get_if<TextNode>(&n)) kept.push_back(t->text);
        }
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = i + 1; j < kept.size(); ++j) EXPECT_LT(oracle_ratio(kept[i], kept[j]), 0.95);
        }
        // Replaying the stream: each text is kept exactly when no earlier kept text is within the threshold.
        std::vector<std::string> replay;
        for (const auto& t : texts) {
            bool twin = false;
            for (const auto& k : replay) twin = twin || oracle_ratio(k, t) >= 0.95;
            if (!twin) replay.push_back(t);
        }
        EXPECT_EQ(kept, replay);
    }
}
