#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "weave/config.hpp"
#include "weave/dedup.hpp"
#include "weave/extractor.hpp"
#include "weave/fetcher.hpp"
#include "weave/gzip.hpp"
#include "weave/image_filters.hpp"
#include "weave/metrics.hpp"
#include "weave/phash.hpp"
#include "weave/pipeline.hpp"
#include "weave/shard.hpp"
#include "weave/sidecar_client.hpp"
#include "weave/stats.hpp"
#include "weave/warc.hpp"

namespace fs = std::filesystem;
using namespace weave;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

PipelineConfig load_config(const std::string& path) {
    if (path.empty()) {
        PipelineConfig cfg;
        cfg.apply_env();
        cfg.validate();
        return cfg;
    }
    return PipelineConfig::load(path);
}

std::vector<Document> read_any(const std::vector<std::string>& paths) {
    std::vector<Document> docs;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                if (e.is_regular_file() && e.path().string().ends_with(".jsonl.gz")) files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) for_each_document(f, [&](Document&& d) { docs.push_back(std::move(d)); });
        } else {
            for_each_document(p, [&](Document&& d) { docs.push_back(std::move(d)); });
        }
    }
    return docs;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
}

void print_stats(const nlohmann::ordered_json& j) {
    std::printf("%-26s %-11s %10s %10s %7s  %s\n", "stage", "unit", "in", "dropped", "drop%", "reasons");
    for (const auto& [name, s] : j.items()) {
        const auto in = s.at("in").get<std::uint64_t>();
        const auto dropped = s.at("dropped").get<std::uint64_t>();
        std::string reasons;
        for (const auto& [r, n] : s.at("reasons").items()) {
            if (!reasons.empty()) reasons += ", ";
            reasons += r + "=" + std::to_string(n.get<std::uint64_t>());
        }
        const double pct = in ? 100.0 * static_cast<double>(dropped) / static_cast<double>(in) : 0.0;
        std::printf("%-26s %-11s %10llu %10llu %6.1f%%  %s\n", name.c_str(),
                    s.at("granularity").get<std::string>().c_str(), static_cast<unsigned long long>(in),
                    static_cast<unsigned long long>(dropped), pct, reasons.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Builds interleaved image-text web documents from WARC crawls"};
    app.require_subcommand(1);

    // pipeline run
    auto* pipeline = app.add_subcommand("pipeline", "Full stage graph");
    pipeline->require_subcommand(1);
    auto* run = pipeline->add_subcommand("run", "Run (or resume) the pipeline");
    std::string config_path;
    bool no_resume = false;
    std::string stop_after;
    int threads = -1;
    run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run->add_flag("--no-resume", no_resume, "Ignore completion markers");
    run->add_option("--stop-after", stop_after, "Stop after this stage")
        ->check(CLI::IsMember(Pipeline::stage_names()));
    run->add_option("--threads", threads, "Worker threads (0: all cores)");

    // config
    auto* config = app.add_subcommand("config", "Print the effective configuration");
    std::string config_show_path;
    config->add_option("--config", config_show_path, "Config file");

    // extract
    auto* extract = app.add_subcommand("extract", "WARC -> documents");
    std::vector<std::string> warcs;
    std::string extract_out;
    extract->add_option("warc", warcs, "WARC files or directories")->required();
    extract->add_option("-o,--out", extract_out, "Output .jsonl.gz")->required();

    // dedup
    auto* dedup = app.add_subcommand("dedup", "Near-duplicate document drop list");
    std::vector<std::string> dedup_in;
    std::string dedup_out;
    double dedup_threshold = 0.8;
    std::size_t dedup_perms = 256;
    dedup->add_option("input", dedup_in, "Document files or shard directories")->required();
    dedup->add_option("-o,--out", dedup_out, "Drop list, one document id per line")->required();
    dedup->add_option("--threshold", dedup_threshold, "Jaccard threshold");
    dedup->add_option("--perms", dedup_perms, "MinHash permutations");

    // fetch-images
    auto* fetch = app.add_subcommand("fetch-images", "Download image URLs into a store");
    std::string urls_file;
    std::string store_dir;
    std::string fetch_config;
    fetch->add_option("--urls", urls_file, "One URL per line")->required()->check(CLI::ExistingFile);
    fetch->add_option("--store", store_dir, "Image store directory")->required();
    fetch->add_option("--config", fetch_config, "Config file for fetch.* settings");

    // phash
    auto* phash_cmd = app.add_subcommand("phash", "Print perceptual hashes");
    std::vector<std::string> images;
    phash_cmd->add_option("image", images, "Image files")->required()->check(CLI::ExistingFile);

    // build-contamination
    auto* contam = app.add_subcommand("build-contamination", "Hash a directory of benchmark images");
    std::string bench_dir;
    std::string contam_out;
    contam->add_option("--images", bench_dir, "Benchmark image directory")->required()->check(CLI::ExistingDirectory);
    contam->add_option("-o,--out", contam_out, "Output hash list")->required();

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Summarize a stats.json");
    std::string stats_path;
    stats_cmd->add_option("stats", stats_path, "stats.json")->required()->check(CLI::ExistingFile);

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Corpus distributions and diversity");
    std::vector<std::string> metrics_in;
    std::string metrics_out;
    std::size_t sample = 256;
    std::string metrics_sidecar;
    metrics->add_option("input", metrics_in, "Document files or shard directories")->required();
    metrics->add_option("-o,--out", metrics_out, "Output directory")->required();
    metrics->add_option("--sample", sample, "Documents per Vendi batch");
    metrics->add_option("--sidecar", metrics_sidecar, "Sidecar endpoint (default: built-in stub)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) {
            PipelineConfig cfg = load_config(config_path);
            if (threads >= 0) cfg.threads = threads;
            Pipeline p(std::move(cfg));
            RunOptions opt;
            opt.resume = !no_resume;
            opt.stop_after = stop_after;
            const RunReport report = p.run(opt);
            for (const auto& s : report.reused) std::fprintf(stderr, "reused %s\n", s.c_str());
            print_stats(p.stats().to_json());
            return 0;
        }
        if (config->parsed()) {
            std::cout << load_config(config_show_path).to_text();
            return 0;
        }
        if (extract->parsed()) {
            std::vector<Document> docs;
            StageStats stats;
            auto& records = stats.stage("warc_records", Granularity::records);
            auto& counter = stats.stage("extract", Granularity::documents);
            for (const auto& path : expand_inputs(warcs)) {
                iterate_records(
                    path,
                    [&](WarcRecordRef&& rec) {
                        records.add_in();
                        counter.add_in();
                        auto r = extract_document(rec);
                        if (r.document) docs.push_back(std::move(*r.document));
                        else counter.drop(r.reason);
                    },
                    &records);
            }
            write_documents(extract_out, docs);
            print_stats(stats.to_json());
            return 0;
        }
        if (dedup->parsed()) {
            LshDedupConfig lcfg;
            lcfg.threshold = dedup_threshold;
            lcfg.num_perm = dedup_perms;
            NearDupDeduper index(lcfg);
            std::ofstream out(dedup_out);
            std::size_t dropped = 0;
            auto docs = read_any(dedup_in);
            for (const auto& d : docs) {
                if (!index.keep(d)) {
                    out << d.id.hex() << '\n';
                    ++dropped;
                }
            }
            std::fprintf(stderr, "bands=%zu rows=%zu dropped=%zu of %zu\n", index.params().bands, index.params().rows,
                         dropped, docs.size());
            return 0;
        }
        if (fetch->parsed()) {
            const PipelineConfig cfg = load_config(fetch_config);
            HttpFetcher fetcher(cfg.fetch);
            ImageStore store(store_dir);
            const auto urls = read_lines(urls_file);
            auto results = fetch_all(fetcher, urls, cfg.fetch_threads);
            for (auto& r : results) {
                if (r.ok()) store.put(*r.record, r.bytes);
                std::printf("%s\t%s\t%s\n", r.url.c_str(), r.reason().c_str(),
                            r.record ? r.record->sha512.c_str() : "-");
            }
            return 0;
        }
        if (phash_cmd->parsed()) {
            for (const auto& path : images) std::printf("%s  %s\n", phash_hex(phash_bytes(read_file(path))).c_str(), path.c_str());
            return 0;
        }
        if (contam->parsed()) {
            const ContaminationBuild b = build_contamination(bench_dir);
            b.set.save(contam_out);
            for (const auto& s : b.skipped) std::fprintf(stderr, "skipped undecodable %s\n", s.c_str());
            std::fprintf(stderr, "%zu images, %zu distinct hashes\n", b.images, b.set.size());
            return 0;
        }
        if (stats_cmd->parsed()) {
            print_stats(nlohmann::ordered_json::parse(read_file(stats_path)));
            return 0;
        }
        if (metrics->parsed()) {
            const auto docs = read_any(metrics_in);
            fs::create_directories(metrics_out);
            std::vector<DistRecord> records;
            std::vector<std::string> texts;
            for (const auto& d : docs) {
                records.push_back(dist_record(d));
                texts.push_back(joined_text(d));
            }
            const Distributions dist = distributions(records);
            write_file_atomic(fs::path(metrics_out) / "tokens.csv", dist.tokens.to_csv());
            write_file_atomic(fs::path(metrics_out) / "images.csv", dist.images.to_csv());
            write_file_atomic(fs::path(metrics_out) / "tokens_images.csv", dist.joint_csv());

            std::unique_ptr<Scorer> scorer;
            if (metrics_sidecar.empty()) scorer = std::make_unique<StubScorer>();
            else scorer = std::make_unique<SidecarClient>(SidecarEndpoint::parse(metrics_sidecar));
            const std::size_t n = std::min(sample, texts.size());
            std::vector<std::vector<double>> rows;
            const auto embs = scorer->embed_text(std::span<const std::string>(texts.data(), n));
            for (const auto& e : embs) {
                if (e.ok()) rows.emplace_back(e.value->begin(), e.value->end());
            }
            const NgramRatios ngram = distinct_ngram_ratio(texts);

            nlohmann::ordered_json j;
            j["documents"] = docs.size();
            for (const auto& [lang, count] : dist.docs_per_lang) j["docs_per_lang"][lang] = count;
            j["vendi_text"] = rows.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(vendi_score(rows));
            j["vendi_sample"] = rows.size();
            for (std::size_t i = 0; i < ngram.ratio.size(); ++i) {
                const std::string key = "distinct_" + std::to_string(i + 1) + "gram";
                j[key] = ngram.ratio[i] ? nlohmann::ordered_json(*ngram.ratio[i]) : nlohmann::ordered_json(nullptr);
            }
            j["distinct_ngram_mean"] = ngram.mean ? nlohmann::ordered_json(*ngram.mean) : nlohmann::ordered_json(nullptr);
            write_file_atomic(fs::path(metrics_out) / "metrics.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const StageFailure& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitStage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
