#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weave/document.hpp"
#include "weave/robots.hpp"

namespace weave {

struct FetchPolicy {
    std::string user_agent = "weave-imgfetch/0.1 (+https://example.invalid/bot)";
    int per_host_concurrency = 2;
    int per_host_delay_ms = 1000;
    int timeout_ms = 30000;
    std::int64_t max_bytes = 20 * 1024 * 1024;
    bool respect_robots = true;
    int retries = 2;
    int backoff_ms = 500;
    int max_redirects = 5;
    int robots_ttl_s = 3600;
    bool verify_tls = true;

    void validate() const;
};

enum class FetchOutcome { ok, denied_robots, timeout, too_large, not_image, http_error, network_error };

std::string_view to_string(FetchOutcome o);

struct FetchResult {
    std::string url;
    FetchOutcome outcome = FetchOutcome::network_error;
    int http_status = 0;
    int attempts = 0;
    std::optional<ImageRecord> record;  // set iff outcome == ok
    std::string bytes;                  // raw body when ok

    bool ok() const { return outcome == FetchOutcome::ok; }
    /// "ok", "denied_robots", ..., "http_error:404".
    std::string reason() const;
};

/// Per-host politeness: at most `concurrency` requests in flight and, when a
/// delay is configured, each request starts no sooner than `delay` after the
/// previous request to that host finished. Measuring from completion makes the
/// gap hold as observed by the server, whatever the network latency.
class HostGate {
public:
    using Clock = std::chrono::steady_clock;

    HostGate(int concurrency, std::chrono::milliseconds delay);

    class Slot {
    public:
        Slot(HostGate* gate, std::string host) : gate_(gate), host_(std::move(host)) {}
        Slot(Slot&& o) noexcept : gate_(std::exchange(o.gate_, nullptr)), host_(std::move(o.host_)) {}
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;
        ~Slot() {
            if (gate_) gate_->release(host_);
        }

    private:
        HostGate* gate_;
        std::string host_;
    };

    Slot acquire(const std::string& host);

private:
    void release(const std::string& host);

    struct HostState {
        int in_flight = 0;
        std::optional<Clock::time_point> last_end;
    };

    int concurrency_;
    std::chrono::milliseconds delay_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::string, HostState> hosts_;
};

nlohmann::json image_record_to_json(const ImageRecord& r);
ImageRecord image_record_from_json(const nlohmann::json& j);

/// Decodes `bytes`, checks it is a supported raster, and fills an ImageRecord
/// (sha512 of the raw bytes, dimensions, pHash).
std::optional<ImageRecord> describe_image(const std::string& url, std::string_view bytes);

class Fetcher {
public:
    virtual ~Fetcher() = default;
    /// Thread-safe.
    virtual FetchResult fetch(const std::string& url) = 0;
};

/// HTTP(S) fetcher honoring robots.txt, per-host politeness, size and time limits.
class HttpFetcher final : public Fetcher {
public:
    explicit HttpFetcher(FetchPolicy policy);

    FetchResult fetch(const std::string& url) override;
    const FetchPolicy& policy() const { return policy_; }
    const RobotsCache& robots() const { return robots_; }

private:
    struct Raw {
        FetchOutcome outcome = FetchOutcome::network_error;
        int status = 0;
        std::string location;
        std::string body;
    };

    Raw get(const std::string& url, std::int64_t max_bytes);
    FetchResult fetch_once(const std::string& url);

    FetchPolicy policy_;
    HostGate gate_;
    RobotsCache robots_;
};

/// Offline fetcher serving `<root>/<host>/<path>` for http(s)://<host>/<path>,
/// with robots.txt read from `<root>/<host>/robots.txt`. Used for mirrored
/// crawls and reproducible test runs.
class DirectoryFetcher final : public Fetcher {
public:
    DirectoryFetcher(std::filesystem::path root, FetchPolicy policy = {});

    FetchResult fetch(const std::string& url) override;

private:
    std::optional<std::filesystem::path> map_url(const std::string& url) const;

    std::filesystem::path root_;
    FetchPolicy policy_;
    RobotsCache robots_;
};

/// Fetches `urls` on `threads` workers; results are returned in input order.
std::vector<FetchResult> fetch_all(Fetcher& fetcher, const std::vector<std::string>& urls, int threads);

/// Content-addressed image store: `<root>/<first2>/<sha512>.bin` plus an
/// `index.jsonl` line per stored URL.
class ImageStore {
public:
    explicit ImageStore(std::filesystem::path root);

    std::filesystem::path path_for(const std::string& sha512) const;
    bool contains(const std::string& sha512) const;
    /// Writes the bytes (if new) and records the URL in the index.
    void put(const ImageRecord& record, std::string_view bytes);
    std::optional<ImageRecord> lookup_url(const std::string& url) const;
    std::string read(const std::string& sha512) const;
    const std::filesystem::path& root() const { return root_; }

    /// Scorer outputs cached by content digest (`scores.jsonl`), so re-runs
    /// never re-score an image.
    std::optional<std::map<std::string, double>> cached_scores(const std::string& sha512) const;
    void cache_scores(const std::string& sha512, const std::map<std::string, double>& scores);

private:
    std::filesystem::path root_;
    mutable std::mutex mu_;
    std::map<std::string, ImageRecord> by_url_;
    std::map<std::string, std::map<std::string, double>> scores_;
};

}  // namespace weave
