#include "weave/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "weave/dedup.hpp"
#include "weave/extractor.hpp"
#include "weave/gzip.hpp"
#include "weave/hashing.hpp"
#include "weave/image_filters.hpp"
#include "weave/joint_filter.hpp"
#include "weave/lang_id.hpp"
#include "weave/languages.hpp"
#include "weave/parallel.hpp"
#include "weave/sidecar_client.hpp"
#include "weave/text_filters.hpp"
#include "weave/warc.hpp"

namespace weave {

namespace fs = std::filesystem;

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                const std::string name = e.path().filename().string();
                const bool warc = name.size() > 5 && (name.ends_with(".warc") || name.ends_with(".warc.gz"));
                if (e.is_regular_file() && warc) found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p)) {
            out.push_back(p);
        } else {
            throw ConfigError("input not found: " + in);
        }
    }
    return out;
}

const std::vector<std::string>& Pipeline::stage_names() {
    static const std::vector<std::string> names = {"extract",      "lang_id",       "text_filter",
                                                   "dedup",        "fetch",         "image_filter",
                                                   "decontaminate", "joint_filter", "shard"};
    return names;
}

namespace {

std::unique_ptr<Fetcher> make_fetcher(const PipelineConfig& cfg) {
    if (cfg.fetch_mode == "directory") return std::make_unique<DirectoryFetcher>(cfg.mirror_dir, cfg.fetch);
    return std::make_unique<HttpFetcher>(cfg.fetch);
}

std::unique_ptr<Scorer> make_scorer(const PipelineConfig& cfg) {
    if (cfg.stub_mode) return std::make_unique<StubScorer>(cfg.embed_dim);
    return std::make_unique<SidecarClient>(SidecarEndpoint::parse(cfg.sidecar));
}

std::string file_digest(const fs::path& path) {
    Sha512Stream h;
    GzReader in(path);  // plain files pass through; digest covers the logical content
    std::string buf(1 << 16, '\0');
    while (const std::size_t n = in.read(buf.data(), buf.size())) h.update(std::string_view(buf.data(), n));
    return to_hex(h.finish());
}

std::string raw_file_digest(const fs::path& path) { return to_hex(sha256(read_file(path))); }

}  // namespace

struct Pipeline::Impl {
    const PipelineConfig& cfg;
    Scorer& scorer;
    Fetcher& fetcher;
    int threads;
    fs::path store_dir;

    // ---- extract
    std::vector<Document> extract(StageStats& stats) {
        auto& records = stats.stage("warc_records", Granularity::records);
        auto& counter = stats.stage("extract", Granularity::documents);
        std::vector<Document> docs;
        const TagPolicy policy;
        for (const auto& path : expand_inputs(cfg.inputs)) {
            std::vector<WarcRecordRef> batch;
            auto flush = [&] {
                std::vector<ExtractResult> results(batch.size());
                parallel_for(batch.size(), threads,
                             [&](std::size_t i) { results[i] = extract_document(batch[i], policy, cfg.extract); });
                for (auto& r : results) {
                    counter.add_in();
                    if (!r.document) {
                        counter.drop(r.reason);
                        continue;
                    }
                    r.document->stage_flags.insert("extract");
                    docs.push_back(std::move(*r.document));
                }
                batch.clear();
            };
            iterate_records(
                path,
                [&](WarcRecordRef&& rec) {
                    records.add_in();
                    batch.push_back(std::move(rec));
                    if (batch.size() >= 256) flush();
                },
                &records);
            flush();
        }
        return docs;
    }

    // ---- lang_id
    std::vector<Document> lang_id(std::vector<Document> docs, StageStats& stats) {
        auto& counter = stats.stage("lang_id", Granularity::documents);
        std::optional<LanguageSelection> plan;
        if (!cfg.plan_counts.empty()) {
            std::map<std::string, std::uint64_t> counts;
            const auto j = nlohmann::json::parse(read_file(cfg.plan_counts));
            for (const auto& [k, v] : j.items()) counts[k] = v.get<std::uint64_t>();
            plan = per_language_extraction_plan(static_cast<std::size_t>(cfg.plan_dump), counts, cfg.plan_top_k,
                                                cfg.plan_threshold)
                       .back();
        }
        const std::set<std::string> allow(cfg.lang_allow.begin(), cfg.lang_allow.end());
        const std::set<std::string> deny(cfg.lang_deny.begin(), cfg.lang_deny.end());
        LidOptions opt = cfg.lid;

        std::vector<ClassifyResult> results(docs.size());
        parallel_for(docs.size(), threads, [&](std::size_t i) { results[i] = classify_document(docs[i], scorer, opt); });
        std::vector<bool> drop(docs.size(), false);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            counter.add_in();
            std::string reason;
            if (!results[i].ok) {
                reason = results[i].reason;
            } else if ((!allow.empty() && !allow.count(*docs[i].lang)) || deny.count(*docs[i].lang)) {
                reason = "lang_filtered";
            } else if (plan && !plan->allows(*docs[i].lang)) {
                reason = "not_in_plan";
            }
            if (!reason.empty()) {
                counter.drop(reason);
                drop[i] = true;
            }
        }
        std::vector<Document> out;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (!drop[i]) out.push_back(std::move(docs[i]));
        }
        return out;
    }

    // ---- text_filter
    std::vector<Document> text_filter(std::vector<Document> docs, StageStats& stats) {
        auto& nodes = stats.stage("text_nodes", Granularity::text_nodes);
        auto& documents = stats.stage("text_documents", Granularity::documents);
        const DateMatcher dates(cfg.node.date_patterns);
        DocFilterConfig dcfg;
        dcfg.min_text_nodes = cfg.doc_min_text_nodes;
        dcfg.min_chars = cfg.doc_min_chars;
        if (!cfg.nsfw_wordlist.empty()) dcfg.nsfw = std::make_shared<WordlistMatcher>(load_wordlist(cfg.nsfw_wordlist));

        std::vector<DocVerdict> verdicts(docs.size());
        parallel_for(docs.size(), threads, [&](std::size_t i) {
            filter_text_nodes(docs[i], cfg.node, dates, &nodes);
            verdicts[i] = filter_document(docs[i], dcfg);
        });
        std::vector<Document> out;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            documents.add_in();
            if (!verdicts[i].keep) {
                documents.drop(verdicts[i].reason);
                continue;
            }
            docs[i].stage_flags.insert("text_filter");
            out.push_back(std::move(docs[i]));
        }
        return out;
    }

    // ---- dedup
    std::vector<Document> dedup(std::vector<Document> docs, StageStats& stats) {
        auto& exact = stats.stage("dedup_exact", Granularity::documents);
        auto& nodes = stats.stage("dedup_nodes", Granularity::text_nodes);
        auto& near = stats.stage("dedup_near", Granularity::documents);

        ExactDocDeduper exact_index;
        std::vector<Document> kept;
        for (auto& d : docs) {
            exact.add_in();
            if (!exact_index.keep(d)) {
                exact.drop("exact_duplicate");
                continue;
            }
            kept.push_back(std::move(d));
        }

        parallel_for(kept.size(), threads, [&](std::size_t i) { node_dedup(kept[i], cfg.node_dedup, &nodes); });

        NearDupDeduper near_index(cfg.lsh);
        std::vector<Signature> sigs(kept.size());
        parallel_for(kept.size(), threads, [&](std::size_t i) { sigs[i] = near_index.signature(kept[i]); });
        std::vector<Document> out;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            near.add_in();
            if (!near_index.keep(kept[i].lang.value_or(""), kept[i].id, sigs[i])) {
                near.drop("near_duplicate");
                continue;
            }
            kept[i].stage_flags.insert("dedup");
            out.push_back(std::move(kept[i]));
        }
        return out;
    }

    // ---- fetch
    std::vector<Document> fetch(std::vector<Document> docs, StageStats& stats) {
        auto& urls = stats.stage("image_urls", Granularity::urls);
        auto& images = stats.stage("fetch", Granularity::images);
        ImageStore store(store_dir);

        std::vector<std::string> unique;
        std::unordered_map<std::string, std::size_t> slot;
        for (auto& d : docs) {
            std::vector<Node> out;
            for (auto& node : d.nodes) {
                if (const auto* img = std::get_if<ImageNode>(&node)) {
                    urls.add_in();
                    const RuleVerdict v = url_rule_filter(img->url, cfg.image_rules);
                    if (!v.keep) {
                        urls.drop(v.reason.substr(0, v.reason.find(':')));
                        continue;
                    }
                    if (slot.emplace(img->url, unique.size()).second) unique.push_back(img->url);
                }
                out.push_back(std::move(node));
            }
            d.nodes = std::move(out);
        }

        std::vector<std::optional<ImageRecord>> records(unique.size());
        std::vector<std::string> reasons(unique.size());
        std::vector<std::string> missing;
        std::vector<std::size_t> missing_idx;
        for (std::size_t i = 0; i < unique.size(); ++i) {
            if (auto r = store.lookup_url(unique[i]); r && store.contains(r->sha512)) {
                records[i] = std::move(r);
            } else {
                missing.push_back(unique[i]);
                missing_idx.push_back(i);
            }
        }
        auto results = fetch_all(fetcher, missing, std::max(1, cfg.fetch_threads));
        for (std::size_t j = 0; j < results.size(); ++j) {
            const std::size_t i = missing_idx[j];
            if (results[j].ok()) {
                store.put(*results[j].record, results[j].bytes);
                records[i] = std::move(results[j].record);
            } else {
                reasons[i] = results[j].reason();
            }
        }

        for (auto& d : docs) {
            std::vector<Node> out;
            for (auto& node : d.nodes) {
                if (auto* img = std::get_if<ImageNode>(&node)) {
                    images.add_in();
                    const std::size_t i = slot.at(img->url);
                    if (!records[i]) {
                        images.drop(reasons[i]);
                        continue;
                    }
                    img->sha512 = records[i]->sha512;
                    img->phash = records[i]->phash;
                    img->width = records[i]->width;
                    img->height = records[i]->height;
                }
                out.push_back(std::move(node));
            }
            d.nodes = std::move(out);
            d.stage_flags.insert("fetch");
        }
        return docs;
    }

    std::string image_path(const ImageNode& img) const {
        if (!img.sha512) throw Error("image was not fetched: " + img.url);
        return ImageStore(store_dir).path_for(*img.sha512).string();
    }

    // ---- image_filter
    std::vector<Document> image_filter(std::vector<Document> docs, StageStats& stats) {
        auto& geometry = stats.stage("image_geometry", Granularity::images);
        auto& safety = stats.stage("image_safety", Granularity::documents);
        auto& dedup_counter = stats.stage("image_dedup", Granularity::images);
        ImageStore store(store_dir);

        for (auto& d : docs) {
            std::vector<Node> out;
            for (auto& node : d.nodes) {
                if (const auto* img = std::get_if<ImageNode>(&node)) {
                    geometry.add_in();
                    const RuleVerdict v = geometry_filter(img->width.value_or(0), img->height.value_or(0), cfg.image_rules);
                    if (!v.keep) {
                        geometry.drop(v.reason);
                        continue;
                    }
                }
                out.push_back(std::move(node));
            }
            d.nodes = std::move(out);
        }

        // Score each distinct image once; results are cached by digest in the store.
        std::vector<std::string> pending;
        std::set<std::string> seen;
        for (const auto& d : docs) {
            for (const auto& node : d.nodes) {
                if (const auto* img = std::get_if<ImageNode>(&node)) {
                    if (seen.insert(*img->sha512).second && !store.cached_scores(*img->sha512)) pending.push_back(*img->sha512);
                }
            }
        }
        std::map<std::string, ScoreMap> scores;
        constexpr std::size_t kBatch = 64;
        for (std::size_t start = 0; start < pending.size(); start += kBatch) {
            const std::size_t end = std::min(pending.size(), start + kBatch);
            std::vector<std::string> paths;
            for (std::size_t i = start; i < end; ++i) paths.push_back(store.path_for(pending[i]).string());
            auto nsfw = scorer.nsfw_image(paths);
            auto csam = scorer.csam_image(paths);
            for (std::size_t i = start; i < end; ++i) {
                const auto& a = nsfw.at(i - start);
                const auto& b = csam.at(i - start);
                if (!a.ok() || !b.ok()) continue;
                ScoreMap merged = *a.value;
                for (const auto& [k, v] : *b.value) merged[k] = v;
                store.cache_scores(pending[i], merged);
            }
        }
        for (const auto& sha : seen) {
            if (auto s = store.cached_scores(sha)) scores[sha] = std::move(*s);
        }

        std::vector<Document> kept;
        for (auto& d : docs) {
            safety.add_in();
            std::string reason;
            for (const auto& node : d.nodes) {
                const auto* img = std::get_if<ImageNode>(&node);
                if (img == nullptr) continue;
                const auto it = scores.find(*img->sha512);
                if (it == scores.end()) {
                    reason = "safety_unavailable";
                    break;
                }
                const SafetyVerdict v = nsfw_gate(it->second, cfg.nsfw);
                if (v == SafetyVerdict::csam) {
                    reason = "csam";
                    break;
                }
                if (v == SafetyVerdict::nsfw && reason.empty()) reason = "nsfw";
            }
            if (!reason.empty()) {
                safety.drop(reason);
                continue;
            }
            kept.push_back(std::move(d));
        }

        ImageCapIndex caps(cfg.image_cap);
        for (auto& d : kept) {
            dedup_counter.add_in(d.image_count());
            dedup_images_in_document(d, &dedup_counter);
            caps.apply(d, &dedup_counter);
            d.stage_flags.insert("image_filter");
        }
        return kept;
    }

    // ---- decontaminate
    std::vector<Document> decontaminate_stage(std::vector<Document> docs, StageStats& stats) {
        auto& images = stats.stage("decontaminate", Granularity::images);
        auto& documents = stats.stage("decontaminate_documents", Granularity::documents);
        const ContaminationSet set = cfg.contamination.empty() ? ContaminationSet{} : ContaminationSet::load(cfg.contamination);
        std::vector<Document> out;
        for (auto& d : docs) {
            images.add_in(d.image_count());
            documents.add_in();
            const DecontaminationResult r = decontaminate(d, set);
            if (r.removed) images.drop("benchmark_phash", r.removed);
            if (r.drop_document) {
                documents.drop("no_images_left");
                continue;
            }
            d.stage_flags.insert("decontaminate");
            out.push_back(std::move(d));
        }
        return out;
    }

    // ---- joint_filter
    std::vector<Document> joint_filter(std::vector<Document> docs, StageStats& stats) {
        auto& texts = stats.stage("joint_text_nodes", Granularity::text_nodes);
        auto& images = stats.stage("joint_images", Granularity::images);
        auto& documents = stats.stage("joint_documents", Granularity::documents);

        std::vector<std::optional<DocEmbeddings>> embs(docs.size());
        parallel_for(docs.size(), threads, [&](std::size_t i) {
            for (int attempt = 0; attempt <= cfg.lid.retries; ++attempt) {
                try {
                    embs[i] = embed_document(docs[i], scorer, [&](const ImageNode& img) { return image_path(img); });
                    return;
                } catch (const Error&) {
                }
            }
        });

        JointFilterConfig jcfg = cfg.joint;
        jcfg.seed = cfg.seed;
        NegativePool pool(jcfg.pool_cap, jcfg.seed);
        std::vector<DocDecisions> decisions(docs.size());
        if (cfg.joint.two_pass) {
            for (std::size_t i = 0; i < docs.size(); ++i) {
                if (embs[i]) pool.add(docs[i], *embs[i]);
            }
            parallel_for(docs.size(), threads, [&](std::size_t i) {
                if (embs[i]) decisions[i] = judge_document(docs[i], *embs[i], pool, jcfg);
            });
        } else {
            for (std::size_t i = 0; i < docs.size(); ++i) {
                if (!embs[i]) continue;
                decisions[i] = judge_document(docs[i], *embs[i], pool, jcfg);
                pool.add(docs[i], *embs[i]);
            }
        }

        std::vector<Document> out;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            documents.add_in();
            texts.add_in(docs[i].text_count());
            images.add_in(docs[i].image_count());
            if (!embs[i]) {
                documents.drop("embedding_unavailable");
                continue;
            }
            for (const auto& d : decisions[i].texts) {
                if (!d.valid) texts.drop("not_top_ranked");
            }
            for (const auto& d : decisions[i].images) {
                if (!d.valid) images.drop("not_top_ranked");
            }
            if (auto reason = apply_joint_filter(docs[i], decisions[i], jcfg)) {
                documents.drop(*reason);
                continue;
            }
            docs[i].stage_flags.insert("joint_filter");
            out.push_back(std::move(docs[i]));
        }
        return out;
    }

    // ---- shard
    std::vector<ShardManifest> shard(std::vector<Document> docs, StageStats& stats, const fs::path& out_dir) {
        auto& counter = stats.stage("shard", Granularity::documents);
        std::map<std::string, std::vector<Document>> by_lang;
        for (auto& d : docs) {
            counter.add_in();
            if (!d.lang || !language_index(*d.lang)) {
                counter.drop("unsupported_lang");
                continue;
            }
            by_lang[*d.lang].push_back(std::move(d));
        }
        std::vector<ShardManifest> manifests;
        ShardOptions opt;
        opt.max_docs_per_file = cfg.shard_max_docs;
        for (auto& [lang, list] : by_lang) {
            std::sort(list.begin(), list.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
            manifests.push_back(write_shard(list, lang, out_dir, opt));
        }
        return manifests;
    }
};

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    scorer_ = make_scorer(cfg_);
    fetcher_ = make_fetcher(cfg_);
}

Pipeline::Pipeline(PipelineConfig cfg, std::shared_ptr<Scorer> scorer, std::shared_ptr<Fetcher> fetcher)
    : cfg_(std::move(cfg)), scorer_(std::move(scorer)), fetcher_(std::move(fetcher)) {
    cfg_.validate();
    if (!scorer_) scorer_ = make_scorer(cfg_);
    if (!fetcher_) fetcher_ = make_fetcher(cfg_);
}

Pipeline::~Pipeline() = default;

RunReport Pipeline::run(const RunOptions& options) {
    RunReport report;
    const fs::path work(cfg_.work_dir);
    const fs::path out_dir(cfg_.out_dir);
    fs::create_directories(work);

    Impl impl{cfg_, *scorer_, *fetcher_, resolve_threads(cfg_.threads),
              cfg_.image_store.empty() ? work / "images" : fs::path(cfg_.image_store)};

    const std::string config_text = cfg_.to_text();
    const std::string config_hash = to_hex(sha256(config_text));

    std::string input_hash;
    {
        Sha512Stream h;
        for (const auto& p : expand_inputs(cfg_.inputs)) {
            h.update(p.filename().string());
            h.update(std::string_view("\0", 1));
            h.update(file_digest(p));
        }
        input_hash = to_hex(h.finish());
    }

    const auto& names = stage_names();
    std::optional<std::vector<Document>> current;
    fs::path current_path;
    std::string prev_hash = input_hash;
    nlohmann::ordered_json stage_records = nlohmann::ordered_json::array();

    auto load_current = [&]() -> std::vector<Document> {
        if (current) return std::move(*current);
        if (current_path.empty()) return {};
        return read_documents(current_path);
    };

    for (std::size_t k = 0; k + 1 < names.size(); ++k) {
        const std::string& name = names[k];
        char prefix[8];
        std::snprintf(prefix, sizeof prefix, "%02zu_", k + 1);
        const fs::path dir = work / (prefix + name);
        const fs::path docs_path = dir / "docs.jsonl.gz";
        const fs::path marker_path = dir / "_SUCCESS";

        bool reused = false;
        if (options.resume && fs::exists(marker_path) && fs::exists(docs_path)) {
            try {
                const auto marker = nlohmann::json::parse(read_file(marker_path));
                if (marker.at("config").get<std::string>() == config_hash &&
                    marker.at("input").get<std::string>() == prev_hash &&
                    marker.at("output").get<std::string>() == raw_file_digest(docs_path)) {
                    stats_.merge_json(nlohmann::ordered_json::parse(read_file(dir / "stats.json")));
                    prev_hash = marker.at("output").get<std::string>();
                    current.reset();
                    current_path = docs_path;
                    reused = true;
                }
            } catch (const std::exception&) {
                reused = false;
            }
        }

        if (!reused) {
            const fs::path tmp = work / (prefix + name + ".tmp");
            fs::remove_all(tmp);
            try {
                StageStats local;
                std::vector<Document> docs;
                if (name == "extract") {
                    docs = impl.extract(local);
                } else {
                    std::vector<Document> in = load_current();
                    if (name == "lang_id") docs = impl.lang_id(std::move(in), local);
                    else if (name == "text_filter") docs = impl.text_filter(std::move(in), local);
                    else if (name == "dedup") docs = impl.dedup(std::move(in), local);
                    else if (name == "fetch") docs = impl.fetch(std::move(in), local);
                    else if (name == "image_filter") docs = impl.image_filter(std::move(in), local);
                    else if (name == "decontaminate") docs = impl.decontaminate_stage(std::move(in), local);
                    else if (name == "joint_filter") docs = impl.joint_filter(std::move(in), local);
                }
                if (options.fail_stage == name) throw Error("injected failure");

                fs::create_directories(tmp);
                write_documents(tmp / "docs.jsonl.gz", docs);
                write_file_atomic(tmp / "stats.json", local.dump());
                const std::string out_hash = raw_file_digest(tmp / "docs.jsonl.gz");
                nlohmann::ordered_json marker;
                marker["stage"] = name;
                marker["config"] = config_hash;
                marker["input"] = prev_hash;
                marker["output"] = out_hash;
                write_file_atomic(tmp / "_SUCCESS", marker.dump(2) + "\n");
                fs::remove_all(dir);
                fs::rename(tmp, dir);

                stats_.merge_json(local.to_json());
                prev_hash = out_hash;
                current = std::move(docs);
                current_path = docs_path;
            } catch (const std::exception& e) {
                std::error_code ec;
                fs::remove_all(tmp, ec);
                throw StageFailure(name, e.what());
            }
        }
        (reused ? report.reused : report.ran).push_back(name);
        stage_records.push_back({{"stage", name}, {"output_sha256", prev_hash}, {"reused", reused}});
        if (options.stop_after == name) return report;
    }

    // The shard stage always runs: it is cheap and owns the output directory.
    const std::string shard_name = names.back();
    fs::path staging = out_dir;
    staging += ".tmp";
    try {
        fs::remove_all(staging);
        fs::create_directories(staging);
        StageStats local;
        report.shards = impl.shard(load_current(), local, staging);
        if (options.fail_stage == shard_name) throw Error("injected failure");
        stats_.merge_json(local.to_json());

        nlohmann::ordered_json manifest;
        manifest["config"] = cfg_.to_map();
        const NearDupDeduper probe(cfg_.lsh);
        manifest["lsh"] = {{"bands", probe.params().bands}, {"rows", probe.params().rows}};
        manifest["stages"] = stage_records;
        nlohmann::ordered_json shards = nlohmann::ordered_json::array();
        for (const auto& m : report.shards) shards.push_back(nlohmann::ordered_json::parse(m.to_json().dump()));
        manifest["shards"] = shards;
        write_file_atomic(staging / "manifest.json", manifest.dump(2) + "\n");
        write_file_atomic(staging / "stats.json", stats_.dump());

        if (fs::exists(out_dir)) {
            if (!fs::is_empty(out_dir) && !fs::exists(out_dir / "manifest.json")) {
                throw Error("refusing to replace non-pipeline directory " + out_dir.string());
            }
            fs::remove_all(out_dir);
        }
        fs::rename(staging, out_dir);
        write_file_atomic(work / "stats.json", stats_.dump());
    } catch (const std::exception& e) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw StageFailure(shard_name, e.what());
    }
    report.ran.push_back(shard_name);
    report.completed = true;
    return report;
}

}  // namespace weave
