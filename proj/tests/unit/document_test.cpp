#include <gtest/gtest.h>

#include <filesystem>

#include "support/test_support.hpp"
#include "weave/error.hpp"
#include "weave/gzip.hpp"
#include "weave/shard.hpp"
#include "weave/stats.hpp"

using namespace weave;
using namespace weave::testing;
namespace fs = std::filesystem;

namespace {

Document random_document(Rng& rng, const std::string& lang) {
    std::vector<Node> nodes;
    const auto n = uniform(rng, 0, 12);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (rng() % 3 == 0) {
            ImageNode img = image("http://img.test/" + random_string(rng, "abcdef", 6) + ".png");
            if (rng() % 2) {
                img.sha512 = std::string(128, 'a');
                img.phash = rng();
                img.width = static_cast<int>(uniform(rng, 1, 4000));
                img.height = static_cast<int>(uniform(rng, 1, 4000));
            }
            nodes.emplace_back(img);
        } else {
            nodes.emplace_back(text(random_utf8(rng, uniform(rng, 1, 40)), rng() % 2 ? "p" : "h2"));
        }
    }
    Document d = make_doc("http://doc.test/" + std::to_string(rng()), std::move(nodes), lang);
    d.lang_scores = {{lang, 12.5}, {"deu_Latn", 0.25}};
    d.stage_flags = {"extract", "lang_id"};
    d.meta["warc_record_id"] = "<urn:uuid:" + std::to_string(rng()) + ">";
    return d;
}

}  // namespace

TEST(DocTextBytes, JoinsWithSingleNewline) {
    EXPECT_EQ(doc_text_bytes(make_doc("u", {text("ab"), text("cd")})), 5u);
    EXPECT_EQ(doc_text_bytes(make_doc("u", {image("http://x/y.png")})), 0u);
    EXPECT_EQ(doc_text_bytes(make_doc("u", {text("é")})), 2u);
    EXPECT_EQ(doc_text_bytes(make_doc("u", {text("ab"), image("http://x/y.png"), text("cd")})), 5u);
}

TEST(DocId, StableAndHex) {
    const auto a = DocId::from_record("<urn:uuid:1>", "http://a/");
    const auto b = DocId::from_record("<urn:uuid:1>", "http://a/");
    const auto c = DocId::from_record("<urn:uuid:2>", "http://a/");
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(a.hex().size(), 32u);
    EXPECT_EQ(DocId::from_hex(a.hex()), a);
    EXPECT_THROW(DocId::from_hex("xyz"), Error);
}

TEST(Jsonl, RoundTripPreservesEverything) {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Document d = random_document(rng, "fra_Latn");
        EXPECT_EQ(from_jsonl(to_jsonl(d)), d);
    }
}

TEST(Jsonl, UnknownFieldsRoundTripOpaquely) {
    const Document d = make_doc("http://a/", {text("hello")}, "eng_Latn");
    auto j = nlohmann::json::parse(to_jsonl(d));
    j["future_field"] = {{"nested", 1}};
    const Document back = from_jsonl(j.dump());
    EXPECT_EQ(nlohmann::json::parse(to_jsonl(back))["future_field"]["nested"], 1);
}

TEST(Jsonl, RejectsInvalidUtf8) {
    const Document d = make_doc("http://a/", {text(std::string("bad \xff byte"))}, "eng_Latn");
    EXPECT_THROW(to_jsonl(d), Error);
}

TEST(Jsonl, SchemaViolationsThrow) {
    EXPECT_THROW(from_jsonl("{}"), Error);
    EXPECT_THROW(from_jsonl("not json"), Error);
    EXPECT_THROW(from_jsonl(R"({"id":"00","url":"u","nodes":[{"kind":"video"}]})"), Error);
}

TEST(Shard, EmptyInputCreatesNothing) {
    TempDir tmp;
    const auto m = write_shard({}, "fra_Latn", tmp.path());
    EXPECT_TRUE(m.files.empty());
    EXPECT_EQ(m.documents(), 0u);
    EXPECT_TRUE(fs::is_empty(tmp.path()));
}

TEST(Shard, TwoDocumentsOneFile) {
    TempDir tmp;
    Rng rng(3);
    std::vector<Document> docs = {random_document(rng, "fra"), random_document(rng, "fra")};
    const auto m = write_shard(docs, "fra", tmp.path());
    ASSERT_EQ(m.files.size(), 1u);
    EXPECT_EQ(m.files[0].name, "fra/fra_00000.jsonl.gz");
    EXPECT_EQ(m.files[0].documents, 2u);
    EXPECT_EQ(m.files[0].bytes, fs::file_size(tmp.path() / m.files[0].name));
    EXPECT_EQ(read_shard(tmp.path() / m.files[0].name), docs);
}

TEST(Shard, SplitsByMaxDocs) {
    TempDir tmp;
    Rng rng(5);
    std::vector<Document> docs;
    for (int i = 0; i < 7; ++i) docs.push_back(random_document(rng, "eng"));
    ShardOptions opt;
    opt.max_docs_per_file = 3;
    const auto m = write_shard(docs, "eng", tmp.path(), opt);
    ASSERT_EQ(m.files.size(), 3u);
    EXPECT_EQ(m.files[2].name, "eng/eng_00002.jsonl.gz");
    EXPECT_EQ(m.files[2].documents, 1u);
    std::vector<Document> back;
    for (const auto& f : m.files) {
        auto part = read_shard(tmp.path() / f.name);
        back.insert(back.end(), part.begin(), part.end());
    }
    EXPECT_EQ(back, docs);
}

TEST(Shard, WrongLanguageAbortsWithoutPartialFiles) {
    TempDir tmp;
    Rng rng(9);
    std::vector<Document> docs = {random_document(rng, "fra"), random_document(rng, "eng")};
    EXPECT_THROW(write_shard(docs, "fra", tmp.path()), Error);
    for (const auto& e : fs::recursive_directory_iterator(tmp.path())) EXPECT_FALSE(e.is_regular_file()) << e.path();
}

TEST(Shard, InvalidUtf8AbortsShard) {
    TempDir tmp;
    std::vector<Document> docs = {make_doc("http://a/", {text("fine")}, "fra"),
                                  make_doc("http://b/", {text(std::string("\xc3\x28"))}, "fra")};
    EXPECT_THROW(write_shard(docs, "fra", tmp.path()), Error);
    EXPECT_FALSE(fs::exists(tmp.path() / "fra" / "fra_00000.jsonl.gz"));
}

TEST(Shard, EmptyFileIsEmptyStream) {
    TempDir tmp;
    write_file_atomic(tmp / "empty.jsonl", "");
    EXPECT_TRUE(read_shard(tmp / "empty.jsonl").empty());
    GzWriter w(tmp / "empty.jsonl.gz");
    w.commit();
    EXPECT_TRUE(read_shard(tmp / "empty.jsonl.gz").empty());
}

TEST(Shard, MalformedLineNamesLineNumber) {
    TempDir tmp;
    const Document d = make_doc("http://a/", {text("x")}, "eng");
    write_file_atomic(tmp / "bad.jsonl", to_jsonl(d) + "\n" + to_jsonl(d) + "\n{broken\n");
    try {
        read_shard(tmp / "bad.jsonl");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad.jsonl:3:"), std::string::npos) << e.what();
    }
}

TEST(Shard, TruncatedGzipIsAnError) {
    TempDir tmp;
    Rng rng(4);
    std::vector<Document> docs;
    for (int i = 0; i < 50; ++i) docs.push_back(random_document(rng, "eng"));
    const auto m = write_shard(docs, "eng", tmp.path());
    const auto path = tmp.path() / m.files[0].name;
    const std::string bytes = read_file(path);
    write_file_atomic(path, bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(read_shard(path), Error);
}

TEST(StageStats, CountsAndJson) {
    StageStats s;
    auto& a = s.stage("a", Granularity::documents);
    a.add_in(10);
    a.drop("x", 3);
    a.drop("y");
    EXPECT_EQ(a.kept(), 6u);
    const auto j = s.to_json();
    EXPECT_EQ(j["a"]["granularity"], "documents");
    EXPECT_EQ(j["a"]["in"], 10);
    EXPECT_EQ(j["a"]["dropped"], 4);
    EXPECT_EQ(j["a"]["reasons"]["x"], 3);

    StageStats t;
    t.merge_json(j);
    EXPECT_EQ(t.dump(), s.dump());
}

TEST(StageStats, SameNameDifferentGranularityIsAnError) {
    StageStats s;
    s.stage("a", Granularity::documents);
    EXPECT_THROW(s.stage("a", Granularity::images), Error);
}
