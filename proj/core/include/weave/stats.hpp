#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace weave {

enum class Granularity { documents, text_nodes, images, urls, records };

std::string_view to_string(Granularity g);
Granularity granularity_from_string(std::string_view s);

/// Counters for one pipeline stage. Increments are thread-safe.
class StageCounter {
public:
    explicit StageCounter(Granularity g) : granularity_(g) {}

    void add_in(std::uint64_t n = 1) { in_.fetch_add(n, std::memory_order_relaxed); }
    void drop(std::string_view reason, std::uint64_t n = 1);

    Granularity granularity() const { return granularity_; }
    std::uint64_t in() const { return in_.load(); }
    std::uint64_t dropped() const { return dropped_.load(); }
    std::uint64_t kept() const { return in() - dropped(); }
    std::map<std::string, std::uint64_t> reasons() const;

    /// Overwrites counters, used when restoring a checkpointed run.
    void restore(std::uint64_t in, std::uint64_t dropped, std::map<std::string, std::uint64_t> reasons);

private:
    Granularity granularity_;
    std::atomic<std::uint64_t> in_{0};
    std::atomic<std::uint64_t> dropped_{0};
    mutable std::mutex mu_;
    std::map<std::string, std::uint64_t> reasons_;
};

/// Ordered collection of stage counters; serializes to stats.json with the
/// stages in registration order.
class StageStats {
public:
    StageCounter& stage(const std::string& name, Granularity g);
    const StageCounter* find(const std::string& name) const;
    std::vector<std::string> names() const;

    nlohmann::ordered_json to_json() const;
    std::string dump() const;
    void merge_json(const nlohmann::ordered_json& j);

private:
    mutable std::mutex mu_;
    std::vector<std::pair<std::string, std::unique_ptr<StageCounter>>> stages_;
};

}  // namespace weave
