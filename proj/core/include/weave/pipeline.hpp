#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "weave/config.hpp"
#include "weave/error.hpp"
#include "weave/fetcher.hpp"
#include "weave/scorer.hpp"
#include "weave/shard.hpp"
#include "weave/stats.hpp"

namespace weave {

class StageFailure : public Error {
public:
    StageFailure(std::string stage, const std::string& what)
        : Error("stage " + stage + " failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct RunOptions {
    /// Reuse stage outputs whose completion marker still matches.
    bool resume = true;
    /// Stop after this stage completes (empty: run everything).
    std::string stop_after;
    /// Fault injection for tests: throw inside this stage before it writes.
    std::string fail_stage;
};

struct RunReport {
    std::vector<std::string> ran;
    std::vector<std::string> reused;
    std::vector<ShardManifest> shards;
    bool completed = false;
};

/// WARC files named by `inputs`: files as-is, directories expanded to their
/// *.warc / *.warc.gz entries, sorted.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs);

class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg);
    Pipeline(PipelineConfig cfg, std::shared_ptr<Scorer> scorer, std::shared_ptr<Fetcher> fetcher);
    ~Pipeline();

    RunReport run(const RunOptions& options = {});
    const StageStats& stats() const { return stats_; }
    const PipelineConfig& config() const { return cfg_; }

    static const std::vector<std::string>& stage_names();

private:
    struct Impl;
    PipelineConfig cfg_;
    std::shared_ptr<Scorer> scorer_;
    std::shared_ptr<Fetcher> fetcher_;
    StageStats stats_;
};

}  // namespace weave
