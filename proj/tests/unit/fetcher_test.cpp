#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "support/image_server.hpp"
#include "support/test_support.hpp"
#include "weave/error.hpp"
#include "weave/fetcher.hpp"
#include "weave/gzip.hpp"
#include "weave/hashing.hpp"
#include "weave/image.hpp"
#include "weave/phash.hpp"

using namespace weave;
using namespace weave::testing;
using namespace std::chrono_literals;

namespace {

FetchPolicy fast_policy() {
    FetchPolicy p;
    p.per_host_delay_ms = 0;
    p.per_host_concurrency = 4;
    p.timeout_ms = 3000;
    p.retries = 1;
    p.backoff_ms = 1;
    return p;
}

std::string png(std::uint64_t seed, int w = 200, int h = 200) { return encode_png(pattern_image(seed, w, h)); }

}  // namespace

TEST(Robots, ReferenceExamples) {
    EXPECT_FALSE(RobotsRules::parse("User-agent: *\nDisallow: /img/\n", "bot").allows("/img/a.png"));
    EXPECT_TRUE(RobotsRules::parse("", "bot").allows("/img/a.png"));
    EXPECT_TRUE(RobotsRules::parse("User-agent: *\nAllow: /img/pub/\nDisallow: /img/\n", "bot").allows("/img/pub/a.png"));
    EXPECT_TRUE(RobotsRules::parse("User-agent: *\nDisallow: /img/\nAllow: /img/pub/\n", "bot").allows("/img/pub/a.png"));
}

TEST(Robots, AgentGroupsAndFallback) {
    const std::string body =
        "User-agent: otherbot\nDisallow: /\n\n"
        "User-agent: Weave-ImgFetch\nUser-agent: friend\nDisallow: /private\n\n"
        "User-agent: *\nDisallow: /all-blocked\n";
    const auto mine = RobotsRules::parse(body, "weave-imgfetch/0.1 (+https://example.invalid/bot)");
    EXPECT_FALSE(mine.allows("/private/x.png"));
    EXPECT_TRUE(mine.allows("/all-blocked/x.png")) << "a specific group replaces the * group";
    const auto other = RobotsRules::parse(body, "unknown/1.0");
    EXPECT_TRUE(other.allows("/private/x.png"));
    EXPECT_FALSE(other.allows("/all-blocked/x.png"));
    EXPECT_EQ(robots_agent_token("Weave-ImgFetch/0.1 (x)"), "weave-imgfetch");
}

TEST(Robots, PatternsAndTies) {
    EXPECT_TRUE(robots_pattern_matches("/a", "/abc"));
    EXPECT_TRUE(robots_pattern_matches("/*.png$", "/x/y.png"));
    EXPECT_FALSE(robots_pattern_matches("/*.png$", "/x/y.png?z=1"));
    EXPECT_TRUE(robots_pattern_matches("/*/b", "/a/b/c"));
    EXPECT_FALSE(robots_pattern_matches("/a$", "/ab"));
    const auto tie = RobotsRules::parse("User-agent: *\nDisallow: /p\nAllow: /p\n", "bot");
    EXPECT_TRUE(tie.allows("/page")) << "equal length: allow wins";
    const auto empty_disallow = RobotsRules::parse("User-agent: *\nDisallow:\n", "bot");
    EXPECT_TRUE(empty_disallow.allows("/anything"));
    EXPECT_TRUE(RobotsRules::parse("User-agent: *\nDisallow: /\n", "bot").allows("/robots.txt"));
}

TEST(RobotsCache, FetchesOncePerOriginAndDegradesToAllow) {
    std::atomic<int> calls{0};
    RobotsCache cache("bot", [&](const std::string& url) -> std::optional<std::string> {
        ++calls;
        if (url.find("down.test") != std::string::npos) return std::nullopt;
        return std::string("User-agent: *\nDisallow: /no\n");
    });
    EXPECT_FALSE(cache.allows("http://a.test/no/x.png"));
    EXPECT_TRUE(cache.allows("http://a.test/yes/x.png"));
    EXPECT_TRUE(cache.allows("http://down.test/no/x.png"));
    EXPECT_FALSE(cache.allows("https://a.test/no/x.png")) << "another scheme is another origin";
    EXPECT_EQ(calls.load(), 3);
    EXPECT_EQ(cache.fetches(), 3u);
    EXPECT_EQ(cache.failures(), 1u);
}

TEST(RobotsCache, TtlExpiry) {
    int calls = 0;
    RobotsCache cache("bot", [&](const std::string&) -> std::optional<std::string> {
        ++calls;
        return std::string();
    }, std::chrono::seconds(0));
    cache.allows("http://a.test/x");
    std::this_thread::sleep_for(5ms);
    cache.allows("http://a.test/y");
    EXPECT_EQ(calls, 2);
}

TEST(HostGate, ConcurrencyCap) {
    HostGate gate(2, 0ms);
    std::atomic<int> in{0}, peak{0};
    std::vector<std::thread> ts;
    for (int i = 0; i < 8; ++i) {
        ts.emplace_back([&] {
            auto slot = gate.acquire("h");
            const int now = ++in;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {
            }
            std::this_thread::sleep_for(10ms);
            --in;
        });
    }
    for (auto& t : ts) t.join();
    EXPECT_EQ(peak.load(), 2);
}

TEST(HostGate, DelayFromCompletion) {
    HostGate gate(4, 30ms);
    std::vector<std::pair<HostGate::Clock::time_point, HostGate::Clock::time_point>> spans;
    std::mutex mu;
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) {
        ts.emplace_back([&] {
            auto slot = gate.acquire("h");
            const auto s = HostGate::Clock::now();
            std::this_thread::sleep_for(5ms);
            std::lock_guard lock(mu);
            spans.push_back({s, HostGate::Clock::now()});
        });
    }
    for (auto& t : ts) t.join();
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) EXPECT_GE(spans[i].first - spans[i - 1].second, 30ms);
}

TEST(HttpFetcher, PngOkWithIndependentDigest) {
    ImageServer server;
    const std::string bytes = png(1);
    server.add("127.0.0.1", "/a.png", ImageServer::Resource::ok(bytes));
    HttpFetcher f(fast_policy());
    const auto r = f.fetch(server.url("127.0.0.1", "/a.png"));
    ASSERT_TRUE(r.ok()) << r.reason();
    EXPECT_EQ(r.record->width, 200);
    EXPECT_EQ(r.record->height, 200);
    EXPECT_EQ(r.record->sha512, to_hex(sha512(bytes)));
    EXPECT_EQ(r.bytes, bytes);
    EXPECT_EQ(r.record->phash, phash_bytes(bytes));
    EXPECT_EQ(server.hits().back().user_agent, fast_policy().user_agent);
}

TEST(HttpFetcher, NotFoundIsNotRetried) {
    ImageServer server;
    HttpFetcher f(fast_policy());
    const auto r = f.fetch(server.url("127.0.0.1", "/missing.png"));
    EXPECT_EQ(r.reason(), "http_error:404");
    EXPECT_EQ(r.attempts, 1);
    EXPECT_EQ(server.requests("127.0.0.1", "/missing.png"), 1u);
}

TEST(HttpFetcher, TooLarge) {
    ImageServer server;
    auto p = fast_policy();
    p.max_bytes = 1000;
    server.add("127.0.0.1", "/exact.bin", ImageServer::Resource::ok(std::string(1000, 'x')));
    server.add("127.0.0.1", "/big.bin", ImageServer::Resource::ok(std::string(1001, 'x')));
    auto chunked = ImageServer::Resource::ok(std::string(100'000, 'x'));
    chunked.chunked = true;
    server.add("127.0.0.1", "/chunked.bin", chunked);
    HttpFetcher f(p);
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/exact.bin")).outcome, FetchOutcome::not_image);
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/big.bin")).outcome, FetchOutcome::too_large);
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/chunked.bin")).outcome, FetchOutcome::too_large);
}

TEST(HttpFetcher, DecodeIsAuthoritative) {
    ImageServer server;
    server.add("127.0.0.1", "/lying.png", ImageServer::Resource::ok("<html>not an image</html>"));
    server.add("127.0.0.1", "/untyped", ImageServer::Resource::ok(png(2), "text/html"));
    HttpFetcher f(fast_policy());
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/lying.png")).outcome, FetchOutcome::not_image);
    EXPECT_TRUE(f.fetch(server.url("127.0.0.1", "/untyped")).ok());
}

TEST(HttpFetcher, RobotsDeniedNeverRequested) {
    ImageServer server;
    server.robots("127.0.0.1", "User-agent: *\nDisallow: /private/\n");
    server.add("127.0.0.1", "/private/a.png", ImageServer::Resource::ok(png(3)));
    server.add("127.0.0.1", "/public/a.png", ImageServer::Resource::ok(png(3)));
    HttpFetcher f(fast_policy());
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/private/a.png")).outcome, FetchOutcome::denied_robots);
    EXPECT_TRUE(f.fetch(server.url("127.0.0.1", "/public/a.png")).ok());
    EXPECT_EQ(server.requests("127.0.0.1", "/private/a.png"), 0u);
    EXPECT_EQ(server.requests("127.0.0.1", "/robots.txt"), 1u);

    auto ignore = fast_policy();
    ignore.respect_robots = false;
    HttpFetcher rude(ignore);
    EXPECT_TRUE(rude.fetch(server.url("127.0.0.1", "/private/a.png")).ok());
}

TEST(HttpFetcher, RedirectsRecheckRobots) {
    ImageServer server;
    server.robots("localhost", "User-agent: *\nDisallow: /blocked/\n");
    server.add("127.0.0.1", "/go", ImageServer::Resource::redirect(302, server.url("localhost", "/blocked/a.png")));
    server.add("127.0.0.1", "/ok", ImageServer::Resource::redirect(301, server.url("localhost", "/fine/a.png")));
    server.add("localhost", "/blocked/a.png", ImageServer::Resource::ok(png(4)));
    server.add("localhost", "/fine/a.png", ImageServer::Resource::ok(png(4)));
    HttpFetcher f(fast_policy());
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/go")).outcome, FetchOutcome::denied_robots);
    EXPECT_EQ(server.requests("localhost", "/blocked/a.png"), 0u);
    const auto r = f.fetch(server.url("127.0.0.1", "/ok"));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.record->url, server.url("127.0.0.1", "/ok"));
}

TEST(HttpFetcher, RedirectLimit) {
    ImageServer server;
    for (int i = 0; i < 10; ++i) {
        server.add("127.0.0.1", "/r" + std::to_string(i),
                   ImageServer::Resource::redirect(302, "/r" + std::to_string(i + 1)));
    }
    HttpFetcher f(fast_policy());
    const auto r = f.fetch(server.url("127.0.0.1", "/r0"));
    EXPECT_EQ(r.outcome, FetchOutcome::http_error);
    EXPECT_EQ(r.http_status, 302);
    EXPECT_EQ(server.requests("127.0.0.1", "/r6"), 0u);
}

TEST(HttpFetcher, TimeoutAndNetworkErrorRetries) {
    ImageServer server;
    auto slow = ImageServer::Resource::ok(png(5));
    slow.delay_ms = 1500;
    server.add("127.0.0.1", "/slow.png", slow);
    auto p = fast_policy();
    p.timeout_ms = 300;
    p.respect_robots = false;
    HttpFetcher f(p);
    EXPECT_EQ(f.fetch(server.url("127.0.0.1", "/slow.png")).outcome, FetchOutcome::timeout);

    const auto dead = f.fetch("http://127.0.0.1:1/x.png");
    EXPECT_EQ(dead.outcome, FetchOutcome::network_error);
    EXPECT_EQ(dead.attempts, 2);
}

TEST(HttpFetcher, PolicyValidation) {
    FetchPolicy p;
    p.max_bytes = 0;
    EXPECT_THROW(HttpFetcher{p}, ConfigError);
    p = FetchPolicy{};
    p.per_host_concurrency = 0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(DirectoryFetcher, MirrorLayout) {
    TempDir tmp;
    std::filesystem::create_directories(tmp / "img.test/pics");
    std::filesystem::create_directories(tmp / "img.test/private");
    write_file_atomic(tmp / "img.test/pics/a.png", png(6));
    write_file_atomic(tmp / "img.test/private/b.png", png(7));
    write_file_atomic(tmp / "img.test/robots.txt", "User-agent: *\nDisallow: /private/\n");
    write_file_atomic(tmp / "img.test/pics/note.txt", "text");
    DirectoryFetcher f(tmp.path());
    EXPECT_TRUE(f.fetch("http://img.test/pics/a.png").ok());
    EXPECT_TRUE(f.fetch("https://img.test/pics/../pics/a.png").ok());
    EXPECT_EQ(f.fetch("http://img.test/private/b.png").reason(), "denied_robots");
    EXPECT_EQ(f.fetch("http://img.test/pics/none.png").reason(), "http_error:404");
    EXPECT_EQ(f.fetch("http://img.test/pics/note.txt").reason(), "not_image");
    EXPECT_EQ(f.fetch("http://img.test/").reason(), "http_error:404");
}

TEST(FetchAll, InputOrderAcrossThreads) {
    TempDir tmp;
    std::filesystem::create_directories(tmp / "h.test");
    std::vector<std::string> urls;
    for (int i = 0; i < 20; ++i) {
        write_file_atomic(tmp / ("h.test/" + std::to_string(i) + ".png"), png(100 + i, 20 + i, 20));
        urls.push_back("http://h.test/" + std::to_string(i) + ".png");
    }
    DirectoryFetcher f(tmp.path());
    const auto one = fetch_all(f, urls, 1);
    const auto many = fetch_all(f, urls, 6);
    ASSERT_EQ(many.size(), urls.size());
    for (std::size_t i = 0; i < urls.size(); ++i) {
        EXPECT_EQ(many[i].url, urls[i]);
        ASSERT_TRUE(many[i].ok());
        EXPECT_EQ(many[i].record->width, 20 + static_cast<int>(i));
        EXPECT_EQ(*many[i].record, *one[i].record);
    }
    EXPECT_TRUE(fetch_all(f, {}, 4).empty());
}

TEST(ImageStore, ContentAddressedAndPersistent) {
    TempDir tmp;
    const std::string bytes = png(8);
    auto rec = describe_image("http://a/x.png", bytes);
    ASSERT_TRUE(rec);
    {
        ImageStore store(tmp / "store");
        store.put(*rec, bytes);
        ImageRecord alias = *rec;
        alias.url = "http://b/y.png";
        store.put(alias, bytes);
        store.cache_scores(rec->sha512, {{"porn", 0.25}});
        EXPECT_EQ(store.path_for(rec->sha512), tmp / "store" / rec->sha512.substr(0, 2) / (rec->sha512 + ".bin"));
    }
    ImageStore reopened(tmp / "store");
    EXPECT_TRUE(reopened.contains(rec->sha512));
    EXPECT_EQ(reopened.read(rec->sha512), bytes);
    ASSERT_TRUE(reopened.lookup_url("http://b/y.png"));
    EXPECT_EQ(reopened.lookup_url("http://b/y.png")->sha512, rec->sha512);
    EXPECT_FALSE(reopened.lookup_url("http://c/z.png"));
    EXPECT_EQ(reopened.cached_scores(rec->sha512)->at("porn"), 0.25);
    EXPECT_FALSE(reopened.cached_scores(std::string(128, '0')));
}

TEST(ImageStore, TornIndexLineIgnored) {
    TempDir tmp;
    const std::string bytes = png(9);
    auto rec = describe_image("http://a/x.png", bytes);
    {
        ImageStore store(tmp / "s");
        store.put(*rec, bytes);
    }
    {
        std::ofstream out(tmp / "s/index.jsonl", std::ios::app);
        out << "{\"url\": \"http://torn";
    }
    ImageStore reopened(tmp / "s");
    EXPECT_TRUE(reopened.lookup_url("http://a/x.png"));
}

TEST(ImageRecordJson, RoundTrip) {
    ImageRecord r{"http://a/x.png", std::string(128, 'f'), 0x8000000000000001ULL, 640, 480, {{"nsfw", 0.5}}};
    EXPECT_EQ(image_record_from_json(image_record_to_json(r)), r);
}
