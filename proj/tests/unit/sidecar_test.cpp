#include <gtest/gtest.h>

#include <netinet/in.h>
#include <openssl/sha.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <set>

#include "support/fake_sidecar.hpp"
#include "support/test_support.hpp"
#include "weave/error.hpp"
#include "weave/gzip.hpp"
#include "weave/languages.hpp"
#include "weave/sidecar_client.hpp"

using namespace weave;
using namespace weave::testing;

namespace {

// Written from the stub definition with OpenSSL directly.
std::vector<float> oracle_embed(const std::string& input, int dim) {
    std::vector<double> c(dim);
    for (int i = 0; i < dim; ++i) {
        std::string buf = input;
        for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((static_cast<unsigned>(i) >> (8 * b)) & 0xFF));
        unsigned char md[SHA256_DIGEST_LENGTH];
        SHA256(reinterpret_cast<const unsigned char*>(buf.data()), buf.size(), md);
        std::uint64_t u = 0;
        for (int b = 7; b >= 0; --b) u = (u << 8) | md[b];
        c[i] = std::ldexp(static_cast<double>(u), -63) - 1.0;
    }
    double n = 0;
    for (double x : c) n += x * x;
    n = std::sqrt(n);
    std::vector<float> out;
    for (double x : c) out.push_back(static_cast<float>(x / n));
    return out;
}

std::vector<std::string> random_texts(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_utf8(rng, 1 + uniform(rng, 0, 40)));
    return out;
}

bool bit_equal(const Embedding& a, const Embedding& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

// Accepts connections into the backlog and never answers.
class SilentServer {
public:
    SilentServer() {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
        ::listen(fd_, 4);
        socklen_t len = sizeof addr;
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }
    ~SilentServer() { ::close(fd_); }
    std::string endpoint() const { return "127.0.0.1:" + std::to_string(port_); }

private:
    int fd_ = -1;
    int port_ = 0;
};

}  // namespace

TEST(StubEmbed, MatchesDefinitionBitForBit) {
    for (const auto& t : random_texts(200, 1)) {
        EXPECT_TRUE(bit_equal(stub_embed(t, 64), oracle_embed(t, 64))) << t;
    }
    EXPECT_TRUE(bit_equal(stub_embed("abc", 64), oracle_embed("abc", 64)));
    EXPECT_TRUE(bit_equal(stub_embed("", 8), oracle_embed("", 8)));
    EXPECT_THROW(stub_embed("x", 1), Error);
}

TEST(StubEmbed, UnitNormAndSpread) {
    const auto texts = random_texts(1000, 2);
    double max_cos = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto a = stub_embed(texts[i], 64);
        double n = 0;
        for (float x : a) n += static_cast<double>(x) * x;
        EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
        if (i + 1 < texts.size() && texts[i] != texts[i + 1]) {
            const auto b = stub_embed(texts[i + 1], 64);
            double dot = 0;
            for (int k = 0; k < 64; ++k) dot += static_cast<double>(a[k]) * b[k];
            max_cos = std::max(max_cos, std::abs(dot));
        }
    }
    EXPECT_LT(max_cos, 0.9);
}

TEST(StubLid, DeterministicTriple) {
    const auto table = language_table();
    const auto a = stub_lid("some text");
    EXPECT_EQ(a, stub_lid("some text"));
    ASSERT_EQ(a.size(), 3u);
    EXPECT_DOUBLE_EQ(a[0].second + a[1].second + a[2].second, 1.0);
    const auto i = *language_index(a[0].first);
    EXPECT_EQ(a[1].first, table[(i + 1) % table.size()]);
    EXPECT_EQ(a[2].first, table[(i + table.size() - 1) % table.size()]);

    StubScorer s;
    const std::vector<std::string> in{"", "x"};
    const auto r = s.lid(in);
    EXPECT_FALSE(r[0].ok());
    EXPECT_EQ(r[0].error, "empty");
    EXPECT_TRUE(r[1].ok());
}

TEST(StubLid, SpreadsAcrossTable) {
    const auto table = language_table();
    const double n = 10000;
    std::vector<double> counts(table.size(), 0);
    std::set<std::string> distinct;
    Rng rng(3);
    while (distinct.size() < 10000) distinct.insert(random_string(rng, "abcdefghijklmnopqrstuvwxyz0123456789 ", 12));
    for (const auto& t : distinct) ++counts[*language_index(stub_lid(t)[0].first)];
    double chi2 = 0;
    const double expected = n / table.size();
    for (double c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
        EXPECT_LE(c / n, 1.0 / table.size() + 0.05);
    }
    // Upper 0.1% point of chi-square with 201 degrees of freedom is about 273.
    EXPECT_LT(chi2, 273.0);
}

TEST(StubScorer, ImagesHashFileBytesAndScoresAreZero) {
    TempDir tmp;
    write_file_atomic(tmp / "a.bin", "image bytes");
    StubScorer s(16);
    const std::vector<std::string> paths{(tmp / "a.bin").string(), (tmp / "missing").string()};
    const auto e = s.embed_image(paths);
    EXPECT_TRUE(bit_equal(*e[0].value, stub_embed("image bytes", 16)));
    EXPECT_EQ(e[1].error, "io");
    const auto n = s.nsfw_image(paths);
    EXPECT_EQ(*n[0].value, (ScoreMap{{"hentai", 0}, {"nudenet_exposed_max", 0}, {"porn", 0}, {"safer_porn", 0}}));
    EXPECT_FALSE(n[1].ok());
    EXPECT_EQ(*s.csam_image(paths)[0].value, (ScoreMap{{"safer_csam", 0}}));
}

TEST(Protocol, RequestEncoding) {
    EXPECT_EQ(protocol::encode_request(7, protocol::Op::lid, "hé \"q\""),
              R"({"id":7,"op":"lid","payload":{"text":"hé \"q\""}})");
    EXPECT_EQ(protocol::encode_request(8, protocol::Op::nsfw_image, "/p.png"),
              R"({"id":8,"op":"nsfw_image","payload":{"path":"/p.png"}})");
    EXPECT_EQ(protocol::encode_request(9, protocol::Op::ping, ""), R"({"id":9,"op":"ping","payload":{}})");
    for (auto op : {protocol::Op::lid, protocol::Op::embed_text, protocol::Op::embed_image, protocol::Op::nsfw_image,
                    protocol::Op::csam_image, protocol::Op::ping}) {
        EXPECT_EQ(protocol::parse_op(protocol::op_name(op)), op);
    }
    EXPECT_FALSE(protocol::parse_op("embed"));
}

TEST(Protocol, FloatFormatting) {
    EXPECT_EQ(protocol::format_f32(1.0f), "1.0");
    EXPECT_EQ(protocol::format_f32(0.1f), "0.1");
    EXPECT_EQ(protocol::format_f32(-0.25f), "-0.25");
    EXPECT_EQ(protocol::format_f32(1e-5f), "1e-05");
    EXPECT_THROW(protocol::format_f32(NAN), Error);
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        const float f = static_cast<float>(uniform01(rng) * 2 - 1) * std::pow(10.0f, static_cast<float>(uniform(rng, 0, 8)) - 4);
        const std::string s = protocol::format_f32(f);
        EXPECT_EQ(std::strtof(s.c_str(), nullptr), f) << s;
    }
    EXPECT_EQ(protocol::encode_ok(3, protocol::lid_to_json({{"eng", 0.8f}, {"fra", 0.15f}})),
              R"({"id":3,"ok":true,"result":[["eng",0.8],["fra",0.15]]})");
    EXPECT_EQ(protocol::encode_error(4, "io"), R"({"id":4,"ok":false,"error":"io"})");
}

TEST(Protocol, HandleRequest) {
    StubScorer s(8);
    EXPECT_EQ(protocol::handle_request(s, "not json"), R"({"id":0,"ok":false,"error":"parse"})");
    EXPECT_EQ(protocol::handle_request(s, R"({"op":"lid"})"), R"({"id":0,"ok":false,"error":"parse"})");
    EXPECT_EQ(protocol::handle_request(s, R"({"id":5,"op":"nope","payload":{}})"), R"({"id":5,"ok":false,"error":"unknown_op"})");
    EXPECT_EQ(protocol::handle_request(s, R"({"id":6,"op":"ping"})"), R"({"id":6,"ok":true,"result":"pong"})");
    EXPECT_EQ(protocol::handle_request(s, R"({"id":7,"op":"lid","payload":{"text":""}})"), R"({"id":7,"ok":false,"error":"empty"})");
    EXPECT_EQ(protocol::handle_request(s, R"({"id":8,"op":"lid","payload":{"path":"x"}})"), R"({"id":8,"ok":false,"error":"payload"})");

    const std::string line = protocol::handle_request(s, protocol::encode_request(9, protocol::Op::embed_text, "abc"));
    EXPECT_EQ(line, protocol::handle_request(s, protocol::encode_request(9, protocol::Op::embed_text, "abc")));
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(bit_equal(protocol::embedding_from_json(j["result"]), stub_embed("abc", 8)));
}

TEST(Protocol, SchemaErrors) {
    EXPECT_THROW(protocol::lid_from_json(nlohmann::json::parse(R"([["eng"]])")), nlohmann::json::exception);
    EXPECT_THROW(protocol::embedding_from_json(nlohmann::json::parse(R"(["x"])")), nlohmann::json::exception);
    EXPECT_THROW(protocol::scores_from_json(nlohmann::json::parse(R"({"porn":"high"})")), nlohmann::json::exception);
}

TEST(SidecarEndpoint, Parse) {
    auto e = SidecarEndpoint::parse("tcp://10.0.0.1:9090");
    EXPECT_EQ(e.kind, SidecarEndpoint::Kind::tcp);
    EXPECT_EQ(e.host, "10.0.0.1");
    EXPECT_EQ(e.port, 9090);
    e = SidecarEndpoint::parse("localhost:80");
    EXPECT_EQ(e.host, "localhost");
    e = SidecarEndpoint::parse("stdio:python3 -m sidecar --mode stub");
    EXPECT_EQ(e.kind, SidecarEndpoint::Kind::stdio);
    EXPECT_EQ(e.command, (std::vector<std::string>{"python3", "-m", "sidecar", "--mode", "stub"}));
    for (const char* bad : {"nohost", "h:0", "h:70000", "h:90x", ":90", "stdio:", "stdio:   "}) {
        EXPECT_THROW(SidecarEndpoint::parse(bad), ConfigError) << bad;
    }
}

TEST(SidecarClient, TcpParityWithStubUnderReordering) {
    FakeSidecar::Options opt;
    opt.dim = 32;
    opt.reorder_window = 5;
    FakeSidecar server(opt);
    SidecarClient client(SidecarEndpoint::parse(server.endpoint()), {.max_in_flight = 7});
    EXPECT_TRUE(client.ping());
    const auto texts = random_texts(103, 5);
    StubScorer stub(32);
    const auto got = client.embed_text(texts);
    const auto want = stub.embed_text(texts);
    ASSERT_EQ(got.size(), texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ASSERT_TRUE(got[i].ok()) << got[i].error;
        EXPECT_TRUE(bit_equal(*got[i].value, *want[i].value)) << i;
    }
    const auto lid = client.lid(texts);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ASSERT_TRUE(lid[i].ok());
        ASSERT_EQ(lid[i].value->size(), 3u);
        const auto expect = stub_lid(texts[i]);
        for (int k = 0; k < 3; ++k) {
            EXPECT_EQ((*lid[i].value)[k].first, expect[k].first);
            EXPECT_EQ(static_cast<float>((*lid[i].value)[k].second), static_cast<float>(expect[k].second));
        }
    }
    EXPECT_EQ(server.connections(), 1u);
    EXPECT_TRUE(client.embed_text({}).empty());
}

TEST(SidecarClient, ImageOpsAndPerItemErrors) {
    TempDir tmp;
    write_file_atomic(tmp / "a.png", "png bytes");
    FakeSidecar server;
    SidecarClient client(SidecarEndpoint::parse(server.endpoint()));
    const std::vector<std::string> paths{(tmp / "a.png").string(), (tmp / "gone.png").string()};
    const auto e = client.embed_image(paths);
    EXPECT_TRUE(bit_equal(*e[0].value, stub_embed("png bytes", 64)));
    EXPECT_EQ(e[1].error, "io");
    const auto n = client.nsfw_image(paths);
    EXPECT_EQ(n[0].value->size(), 4u);
    EXPECT_EQ(n[1].error, "io");
    EXPECT_EQ(client.csam_image(paths)[0].value->at("safer_csam"), 0.0);
    const std::vector<std::string> texts{"", "ok"};
    const auto l = client.lid(texts);
    EXPECT_EQ(l[0].error, "empty");
    EXPECT_TRUE(l[1].ok());
}

TEST(SidecarClient, ServerErrorAndSchemaReplies) {
    FakeSidecar::Options opt;
    opt.override_reply = [](const std::string& line) -> std::string {
        const auto j = nlohmann::json::parse(line);
        const auto text = j["payload"].value("text", std::string());
        const auto id = j["id"].get<std::uint64_t>();
        if (text == "fail") return protocol::encode_error(id, "model_oom");
        if (text == "weird") return protocol::encode_ok(id, "not a vector");
        return {};
    };
    FakeSidecar server(opt);
    SidecarClient client(SidecarEndpoint::parse(server.endpoint()));
    const std::vector<std::string> texts{"a", "fail", "b", "weird"};
    const auto r = client.embed_text(texts);
    EXPECT_TRUE(r[0].ok());
    EXPECT_EQ(r[1].error, "model_oom");
    EXPECT_TRUE(r[2].ok());
    EXPECT_EQ(r[3].error, "schema");
}

TEST(SidecarClient, DroppedConnectionFailsPendingThenReconnects) {
    FakeSidecar::Options opt;
    opt.reorder_window = 1;
    opt.drop_after = 5;
    FakeSidecar server(opt);
    SidecarClient client(SidecarEndpoint::parse(server.endpoint()), {.max_in_flight = 1});
    const auto texts = random_texts(8, 6);
    const auto r = client.embed_text(texts);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(r[i].ok()) << i;
    for (std::size_t i = 5; i < 8; ++i) {
        EXPECT_FALSE(r[i].ok());
        EXPECT_NE(r[i].error.find("closed"), std::string::npos) << r[i].error;
    }
    const std::vector<std::string> again{"x"};
    EXPECT_TRUE(client.embed_text(again)[0].ok());
    EXPECT_EQ(server.connections(), 2u);
}

TEST(SidecarClient, TimeoutSurfacesAsFailure) {
    SilentServer server;
    SidecarClient client(SidecarEndpoint::parse(server.endpoint()), {.max_in_flight = 4, .timeout = std::chrono::milliseconds(200)});
    const std::vector<std::string> texts{"a", "b"};
    const auto r = client.embed_text(texts);
    for (const auto& x : r) EXPECT_NE(x.error.find("timed out"), std::string::npos) << x.error;
    EXPECT_FALSE(client.ping());
}

TEST(SidecarClient, ConnectFailure) {
    SidecarClient client(SidecarEndpoint::parse("127.0.0.1:1"));
    const std::vector<std::string> texts{"a"};
    EXPECT_NE(client.embed_text(texts)[0].error.find("connect"), std::string::npos);
}

TEST(SidecarClient, StdioChildProcess) {
    SidecarClient client(SidecarEndpoint::parse(std::string("stdio:") + WEAVE_FAKE_SIDECAR + " 16"), {.max_in_flight = 8});
    EXPECT_TRUE(client.ping());
    const auto texts = random_texts(50, 7);
    const auto r = client.embed_text(texts);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ASSERT_TRUE(r[i].ok());
        EXPECT_TRUE(bit_equal(*r[i].value, stub_embed(texts[i], 16)));
    }
}

TEST(SidecarClient, SharedBetweenThreads) {
    FakeSidecar server;
    SidecarClient client(SidecarEndpoint::parse(server.endpoint()));
    std::vector<std::thread> threads;
    std::atomic<int> bad{0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            const auto texts = random_texts(40, 100 + t);
            const auto r = client.embed_text(texts);
            for (std::size_t i = 0; i < texts.size(); ++i) {
                if (!r[i].ok() || !bit_equal(*r[i].value, stub_embed(texts[i], 64))) ++bad;
            }
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(bad.load(), 0);
}
