#include "weave/robots.hpp"

#include <algorithm>
#include <cctype>

#include "weave/url.hpp"

namespace weave {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool match_here(std::string_view pat, std::string_view path) {
    // Backtracking over '*'; patterns are short.
    while (!pat.empty()) {
        if (pat.front() == '*') {
            pat.remove_prefix(1);
            if (pat.empty()) return true;
            for (std::size_t i = 0; i <= path.size(); ++i) {
                if (match_here(pat, path.substr(i))) return true;
            }
            return false;
        }
        if (pat.front() == '$' && pat.size() == 1) return path.empty();
        if (path.empty() || pat.front() != path.front()) return false;
        pat.remove_prefix(1);
        path.remove_prefix(1);
    }
    return true;
}

}  // namespace

bool robots_pattern_matches(std::string_view pattern, std::string_view path) { return match_here(pattern, path); }

std::string robots_agent_token(std::string_view user_agent) {
    const auto end = user_agent.find_first_of("/ ");
    return ascii_lower(strip(user_agent.substr(0, end)));
}

RobotsRules RobotsRules::parse(std::string_view body, std::string_view user_agent) {
    const std::string token = robots_agent_token(user_agent);

    struct Group {
        std::vector<std::string> agents;
        std::vector<Rule> rules;
    };
    std::vector<Group> groups;
    bool in_agents = false;

    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t eol = body.find_first_of("\r\n", pos);
        if (eol == std::string_view::npos) eol = body.size();
        std::string_view line = body.substr(pos, eol - pos);
        pos = eol + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const std::string key = ascii_lower(strip(line.substr(0, colon)));
        const std::string_view value = strip(line.substr(colon + 1));

        if (key == "user-agent") {
            if (!in_agents) groups.emplace_back();
            groups.back().agents.push_back(ascii_lower(value));
            in_agents = true;
        } else if (key == "allow" || key == "disallow") {
            in_agents = false;
            if (groups.empty()) continue;
            // An empty Disallow means "nothing is disallowed".
            if (value.empty()) continue;
            groups.back().rules.push_back({key == "allow", std::string(value)});
        } else {
            in_agents = false;
        }
    }

    RobotsRules out;
    bool matched = false;
    for (const auto& g : groups) {
        if (std::find(g.agents.begin(), g.agents.end(), token) != g.agents.end() && !token.empty()) {
            out.rules_.insert(out.rules_.end(), g.rules.begin(), g.rules.end());
            matched = true;
        }
    }
    if (!matched) {
        for (const auto& g : groups) {
            if (std::find(g.agents.begin(), g.agents.end(), "*") != g.agents.end()) {
                out.rules_.insert(out.rules_.end(), g.rules.begin(), g.rules.end());
            }
        }
    }
    return out;
}

bool RobotsRules::allows(std::string_view path) const {
    if (path == "/robots.txt") return true;
    std::size_t best_len = 0;
    bool best_allow = true;
    bool any = false;
    for (const auto& r : rules_) {
        if (!robots_pattern_matches(r.pattern, path)) continue;
        const std::size_t len = r.pattern.size();
        if (!any || len > best_len || (len == best_len && r.allow && !best_allow)) {
            best_len = len;
            best_allow = r.allow;
            any = true;
        }
    }
    return !any || best_allow;
}

RobotsCache::RobotsCache(std::string user_agent, FetchFn fetch, std::chrono::seconds ttl)
    : user_agent_(std::move(user_agent)), fetch_(std::move(fetch)), ttl_(ttl) {}

bool RobotsCache::allows(std::string_view url) {
    const Url u = Url::parse(url);
    const std::string host_port = u.host() + ":" + std::to_string(u.port());
    const std::string origin = u.scheme + "://" + host_port;

    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(mu_);
        auto& s = cache_[origin];
        if (!s) s = std::make_shared<Slot>();
        slot = s;
    }
    // Per-origin lock: concurrent workers never duplicate a robots request,
    // and other origins are not blocked meanwhile.
    std::lock_guard slot_lock(slot->mu);
    const auto now = Clock::now();
    if (!slot->entry || now - slot->entry->fetched > ttl_) {
        const auto body = fetch_(u.scheme + "://" + host_port + "/robots.txt");
        {
            std::lock_guard lock(mu_);
            ++fetches_;
            if (!body) ++failures_;
        }
        slot->entry = Entry{body ? RobotsRules::parse(*body, user_agent_) : RobotsRules::allow_all(), now};
    }
    return slot->entry->rules.allows(u.request_target());
}

std::size_t RobotsCache::fetches() const {
    std::lock_guard lock(mu_);
    return fetches_;
}

std::size_t RobotsCache::failures() const {
    std::lock_guard lock(mu_);
    return failures_;
}

}  // namespace weave
