#include "weave/fetcher.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "weave/error.hpp"
#include "weave/gzip.hpp"
#include "weave/hashing.hpp"
#include "weave/image.hpp"
#include "weave/phash.hpp"
#include "weave/url.hpp"

namespace weave {

void FetchPolicy::validate() const {
    if (max_bytes <= 0) throw ConfigError("max_bytes must be positive");
    if (per_host_concurrency < 1) throw ConfigError("per_host_concurrency must be >= 1");
    if (per_host_delay_ms < 0 || timeout_ms <= 0) throw ConfigError("invalid fetch timing");
    if (retries < 0 || backoff_ms < 0 || max_redirects < 0) throw ConfigError("invalid retry settings");
}

std::string_view to_string(FetchOutcome o) {
    switch (o) {
        case FetchOutcome::ok: return "ok";
        case FetchOutcome::denied_robots: return "denied_robots";
        case FetchOutcome::timeout: return "timeout";
        case FetchOutcome::too_large: return "too_large";
        case FetchOutcome::not_image: return "not_image";
        case FetchOutcome::http_error: return "http_error";
        case FetchOutcome::network_error: return "network_error";
    }
    return "unknown";
}

std::string FetchResult::reason() const {
    std::string r(to_string(outcome));
    if (outcome == FetchOutcome::http_error) r += ":" + std::to_string(http_status);
    return r;
}

HostGate::HostGate(int concurrency, std::chrono::milliseconds delay) : concurrency_(concurrency), delay_(delay) {
    if (concurrency < 1) throw ConfigError("per_host_concurrency must be >= 1");
}

HostGate::Slot HostGate::acquire(const std::string& host) {
    std::unique_lock lock(mu_);
    HostState& st = hosts_[host];
    for (;;) {
        if (delay_.count() == 0) {
            if (st.in_flight < concurrency_) break;
            cv_.wait(lock);
            continue;
        }
        if (st.in_flight == 0) {
            if (!st.last_end) break;
            const auto ready = *st.last_end + delay_;
            if (Clock::now() >= ready) break;
            cv_.wait_until(lock, ready);
            continue;
        }
        cv_.wait(lock);
    }
    ++st.in_flight;
    return Slot(this, host);
}

void HostGate::release(const std::string& host) {
    {
        std::lock_guard lock(mu_);
        HostState& st = hosts_[host];
        --st.in_flight;
        st.last_end = Clock::now();
    }
    cv_.notify_all();
}

nlohmann::json image_record_to_json(const ImageRecord& r) {
    nlohmann::json j = {{"url", r.url},     {"sha512", r.sha512}, {"phash", phash_hex(r.phash)},
                        {"width", r.width}, {"height", r.height}, {"scores", r.scores}};
    return j;
}

ImageRecord image_record_from_json(const nlohmann::json& j) {
    ImageRecord r;
    r.url = j.at("url").get<std::string>();
    r.sha512 = j.at("sha512").get<std::string>();
    r.phash = parse_phash_hex(j.at("phash").get<std::string>());
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    if (j.contains("scores")) r.scores = j.at("scores").get<std::map<std::string, double>>();
    return r;
}

std::optional<ImageRecord> describe_image(const std::string& url, std::string_view bytes) {
    RgbImage img;
    try {
        img = decode_image(bytes);
    } catch (const Error&) {
        return std::nullopt;
    }
    ImageRecord r;
    r.url = url;
    r.sha512 = to_hex(sha512(bytes));
    r.width = img.width;
    r.height = img.height;
    r.phash = phash(img);
    return r;
}

namespace {

bool is_http_url(const Url& u) { return (u.scheme == "http" || u.scheme == "https") && !u.host().empty(); }

FetchResult finish_ok(const std::string& url, std::string bytes, FetchResult r) {
    auto rec = describe_image(url, bytes);
    if (!rec) {
        r.outcome = FetchOutcome::not_image;
        return r;
    }
    r.outcome = FetchOutcome::ok;
    r.record = std::move(rec);
    r.bytes = std::move(bytes);
    return r;
}

}  // namespace

HttpFetcher::HttpFetcher(FetchPolicy policy)
    : policy_(std::move(policy)),
      gate_(policy_.per_host_concurrency, std::chrono::milliseconds(policy_.per_host_delay_ms)),
      robots_(policy_.user_agent,
              [this](const std::string& robots_url) -> std::optional<std::string> {
                  Raw raw = get(robots_url, 512 * 1024);
                  if (raw.outcome != FetchOutcome::ok || raw.status < 200 || raw.status >= 300) return std::nullopt;
                  return std::move(raw.body);
              },
              std::chrono::seconds(policy_.robots_ttl_s)) {
    policy_.validate();
}

HttpFetcher::Raw HttpFetcher::get(const std::string& url, std::int64_t max_bytes) {
    Raw raw;
    const Url u = Url::parse(url);
    if (!is_http_url(u)) return raw;

    const std::string origin = u.scheme + "://" + u.host() + ":" + std::to_string(u.port());
    auto slot = gate_.acquire(u.host());

    httplib::Client cli(origin);
    const auto timeout = std::chrono::milliseconds(policy_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    cli.set_follow_location(false);
    cli.set_keep_alive(false);
    cli.enable_server_certificate_verification(policy_.verify_tls);

    const httplib::Headers headers = {{"User-Agent", policy_.user_agent}, {"Accept", "image/*,*/*;q=0.5"}};
    const auto start = std::chrono::steady_clock::now();
    bool too_large = false;
    bool timed_out = false;
    bool status_seen = false;

    auto res = cli.Get(
        u.request_target(), headers,
        [&](const httplib::Response& resp) {
            status_seen = true;
            raw.status = resp.status;
            raw.location = resp.get_header_value("Location");
            if (resp.status < 200 || resp.status >= 300) return false;
            if (resp.has_header("Content-Length")) {
                try {
                    if (std::stoll(resp.get_header_value("Content-Length")) > max_bytes) {
                        too_large = true;
                        return false;
                    }
                } catch (const std::exception&) {
                }
            }
            return true;
        },
        [&](const char* data, std::size_t n) {
            if (static_cast<std::int64_t>(raw.body.size() + n) > max_bytes) {
                too_large = true;
                return false;
            }
            if (std::chrono::steady_clock::now() - start > timeout) {
                timed_out = true;
                return false;
            }
            raw.body.append(data, n);
            return true;
        });

    if (too_large) {
        raw.outcome = FetchOutcome::too_large;
    } else if (timed_out) {
        raw.outcome = FetchOutcome::timeout;
    } else if (res) {
        raw.status = res->status;
        raw.outcome = FetchOutcome::ok;
    } else if (res.error() == httplib::Error::Canceled && status_seen) {
        raw.outcome = FetchOutcome::ok;  // non-2xx; body not needed
        raw.body.clear();
    } else if (res.error() == httplib::Error::ConnectionTimeout ||
               std::chrono::steady_clock::now() - start >= timeout) {
        raw.outcome = FetchOutcome::timeout;
    } else {
        raw.outcome = FetchOutcome::network_error;
    }
    return raw;
}

FetchResult HttpFetcher::fetch(const std::string& url) {
    FetchResult r;
    r.url = url;
    std::string current = url;
    for (int hop = 0;; ++hop) {
        if (!is_http_url(Url::parse(current))) {
            r.outcome = FetchOutcome::network_error;
            return r;
        }
        if (policy_.respect_robots && !robots_.allows(current)) {
            r.outcome = FetchOutcome::denied_robots;
            return r;
        }
        Raw raw;
        for (int attempt = 0;; ++attempt) {
            raw = get(current, policy_.max_bytes);
            ++r.attempts;
            if (raw.outcome != FetchOutcome::network_error || attempt >= policy_.retries) break;
            std::this_thread::sleep_for(std::chrono::milliseconds(policy_.backoff_ms) * (1 << attempt));
        }
        r.http_status = raw.status;
        if (raw.outcome != FetchOutcome::ok) {
            r.outcome = raw.outcome;
            return r;
        }
        if (raw.status >= 300 && raw.status < 400 && !raw.location.empty() && hop < policy_.max_redirects) {
            const auto next = resolve_url(current, raw.location);
            if (!next) {
                r.outcome = FetchOutcome::http_error;
                return r;
            }
            current = *next;
            continue;
        }
        if (raw.status < 200 || raw.status >= 300) {
            r.outcome = FetchOutcome::http_error;
            return r;
        }
        return finish_ok(url, std::move(raw.body), std::move(r));
    }
}

DirectoryFetcher::DirectoryFetcher(std::filesystem::path root, FetchPolicy policy)
    : root_(std::move(root)),
      policy_(std::move(policy)),
      robots_(policy_.user_agent, [this](const std::string& robots_url) -> std::optional<std::string> {
          const auto path = map_url(robots_url);
          if (!path || !std::filesystem::is_regular_file(*path)) return std::nullopt;
          return read_file(*path);
      }) {
    policy_.validate();
}

std::optional<std::filesystem::path> DirectoryFetcher::map_url(const std::string& url) const {
    const Url u = Url::parse(url);
    if (!is_http_url(u)) return std::nullopt;
    const std::string path = remove_dot_segments(u.path);
    if (path.empty() || path.back() == '/') return std::nullopt;
    std::filesystem::path rel(u.host());
    rel /= std::filesystem::path(path.substr(1));
    for (const auto& part : rel) {
        if (part == "..") return std::nullopt;
    }
    return root_ / rel;
}

FetchResult DirectoryFetcher::fetch(const std::string& url) {
    FetchResult r;
    r.url = url;
    r.attempts = 1;
    if (policy_.respect_robots && !robots_.allows(url)) {
        r.outcome = FetchOutcome::denied_robots;
        return r;
    }
    const auto path = map_url(url);
    if (!path || !std::filesystem::is_regular_file(*path)) {
        r.outcome = FetchOutcome::http_error;
        r.http_status = 404;
        return r;
    }
    r.http_status = 200;
    if (static_cast<std::int64_t>(std::filesystem::file_size(*path)) > policy_.max_bytes) {
        r.outcome = FetchOutcome::too_large;
        return r;
    }
    return finish_ok(url, read_file(*path), std::move(r));
}

std::vector<FetchResult> fetch_all(Fetcher& fetcher, const std::vector<std::string>& urls, int threads) {
    std::vector<FetchResult> out(urls.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < urls.size(); i = next++) out[i] = fetcher.fetch(urls[i]);
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(urls.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

ImageStore::ImageStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
    if (std::ifstream in(root_ / "index.jsonl"); in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                ImageRecord r = image_record_from_json(nlohmann::json::parse(line));
                by_url_[r.url] = std::move(r);
            } catch (const std::exception&) {
                // A torn final line from an interrupted run; the image is refetched.
            }
        }
    }
    if (std::ifstream in(root_ / "scores.jsonl"); in) {
        std::string line;
        while (std::getline(in, line)) {
            try {
                const auto j = nlohmann::json::parse(line);
                scores_[j.at("sha512").get<std::string>()] = j.at("scores").get<std::map<std::string, double>>();
            } catch (const std::exception&) {
            }
        }
    }
}

std::filesystem::path ImageStore::path_for(const std::string& sha512) const {
    if (sha512.size() < 2) throw Error("bad sha512");
    return root_ / sha512.substr(0, 2) / (sha512 + ".bin");
}

bool ImageStore::contains(const std::string& sha512) const { return std::filesystem::exists(path_for(sha512)); }

void ImageStore::put(const ImageRecord& record, std::string_view bytes) {
    std::lock_guard lock(mu_);
    const auto path = path_for(record.sha512);
    if (!std::filesystem::exists(path)) {
        std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, bytes);
    }
    if (by_url_.count(record.url)) return;
    std::ofstream out(root_ / "index.jsonl", std::ios::app);
    out << image_record_to_json(record).dump() << '\n';
    if (!out) throw Error("cannot append image index");
    by_url_[record.url] = record;
}

std::optional<ImageRecord> ImageStore::lookup_url(const std::string& url) const {
    std::lock_guard lock(mu_);
    const auto it = by_url_.find(url);
    if (it == by_url_.end()) return std::nullopt;
    return it->second;
}

std::string ImageStore::read(const std::string& sha512) const { return read_file(path_for(sha512)); }

std::optional<std::map<std::string, double>> ImageStore::cached_scores(const std::string& sha512) const {
    std::lock_guard lock(mu_);
    const auto it = scores_.find(sha512);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

void ImageStore::cache_scores(const std::string& sha512, const std::map<std::string, double>& scores) {
    std::lock_guard lock(mu_);
    auto& slot = scores_[sha512];
    for (const auto& [k, v] : scores) slot[k] = v;
    std::ofstream out(root_ / "scores.jsonl", std::ios::app);
    out << nlohmann::json{{"sha512", sha512}, {"scores", scores}}.dump() << '\n';
}

}  // namespace weave
