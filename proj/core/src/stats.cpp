#include "weave/stats.hpp"

#include "weave/error.hpp"

namespace weave {

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::documents: return "documents";
        case Granularity::text_nodes: return "text_nodes";
        case Granularity::images: return "images";
        case Granularity::urls: return "urls";
        case Granularity::records: return "records";
    }
    return "documents";
}

Granularity granularity_from_string(std::string_view s) {
    if (s == "documents") return Granularity::documents;
    if (s == "text_nodes") return Granularity::text_nodes;
    if (s == "images") return Granularity::images;
    if (s == "urls") return Granularity::urls;
    if (s == "records") return Granularity::records;
    throw Error("unknown granularity '" + std::string(s) + "'");
}

void StageCounter::drop(std::string_view reason, std::uint64_t n) {
    dropped_.fetch_add(n, std::memory_order_relaxed);
    std::lock_guard lock(mu_);
    reasons_[std::string(reason)] += n;
}

std::map<std::string, std::uint64_t> StageCounter::reasons() const {
    std::lock_guard lock(mu_);
    return reasons_;
}

void StageCounter::restore(std::uint64_t in, std::uint64_t dropped, std::map<std::string, std::uint64_t> reasons) {
    in_ = in;
    dropped_ = dropped;
    std::lock_guard lock(mu_);
    reasons_ = std::move(reasons);
}

StageCounter& StageStats::stage(const std::string& name, Granularity g) {
    std::lock_guard lock(mu_);
    for (auto& [n, counter] : stages_) {
        if (n == name) {
            if (counter->granularity() != g) throw Error("stage '" + name + "' registered with another granularity");
            return *counter;
        }
    }
    stages_.emplace_back(name, std::make_unique<StageCounter>(g));
    return *stages_.back().second;
}

const StageCounter* StageStats::find(const std::string& name) const {
    std::lock_guard lock(mu_);
    for (const auto& [n, counter] : stages_) {
        if (n == name) return counter.get();
    }
    return nullptr;
}

std::vector<std::string> StageStats::names() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& s : stages_) out.push_back(s.first);
    return out;
}

nlohmann::ordered_json StageStats::to_json() const {
    std::lock_guard lock(mu_);
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, c] : stages_) {
        nlohmann::ordered_json s;
        s["granularity"] = to_string(c->granularity());
        s["in"] = c->in();
        s["dropped"] = c->dropped();
        nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
        for (const auto& [r, n] : c->reasons()) reasons[r] = n;
        s["reasons"] = std::move(reasons);
        j[name] = std::move(s);
    }
    return j;
}

std::string StageStats::dump() const { return to_json().dump(2) + "\n"; }

void StageStats::merge_json(const nlohmann::ordered_json& j) {
    for (const auto& [name, s] : j.items()) {
        auto& c = stage(name, granularity_from_string(s.at("granularity").get<std::string>()));
        std::map<std::string, std::uint64_t> reasons;
        for (const auto& [r, n] : s.at("reasons").items()) reasons[r] = n.get<std::uint64_t>();
        c.restore(s.at("in").get<std::uint64_t>(), s.at("dropped").get<std::uint64_t>(), std::move(reasons));
    }
}

}  // namespace weave
