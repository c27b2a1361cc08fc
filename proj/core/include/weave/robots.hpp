#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace weave {

/// Parsed robots.txt rules for one user agent.
class RobotsRules {
public:
    struct Rule {
        bool allow = false;
        std::string pattern;
    };

    /// Selects the groups whose user-agent token matches `user_agent`
    /// (case-insensitive product token), falling back to `*`.
    static RobotsRules parse(std::string_view body, std::string_view user_agent);
    static RobotsRules allow_all() { return {}; }

    /// `path` is the request target (path plus optional query).
    bool allows(std::string_view path) const;
    const std::vector<Rule>& rules() const { return rules_; }

private:
    std::vector<Rule> rules_;
};

/// True when `pattern` (with `*` wildcards and an optional trailing `$`)
/// matches a prefix of `path`, or all of it when anchored.
bool robots_pattern_matches(std::string_view pattern, std::string_view path);

/// Product token used for group matching: text before the first '/' or space, lowercased.
std::string robots_agent_token(std::string_view user_agent);

/// Per-origin rules cache with a TTL. `fetch` returns the body of
/// robots.txt, or nullopt when it is missing or unfetchable (allow all).
class RobotsCache {
public:
    using FetchFn = std::function<std::optional<std::string>(const std::string& robots_url)>;
    using Clock = std::chrono::steady_clock;

    RobotsCache(std::string user_agent, FetchFn fetch, std::chrono::seconds ttl = std::chrono::hours(1));

    bool allows(std::string_view url);
    std::size_t fetches() const;
    std::size_t failures() const;

private:
    struct Entry {
        RobotsRules rules;
        Clock::time_point fetched;
    };

    std::string user_agent_;
    FetchFn fetch_;
    std::chrono::seconds ttl_;
    mutable std::mutex mu_;
    struct Slot {
        std::mutex mu;
        std::optional<Entry> entry;
    };
    std::map<std::string, std::shared_ptr<Slot>> cache_;
    std::size_t fetches_ = 0;
    std::size_t failures_ = 0;
};

}  // namespace weave
