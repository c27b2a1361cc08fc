#include "weave/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "weave/error.hpp"
#include "weave/gzip.hpp"

namespace weave {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view drop_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (quoted && line[i] == '\\') {
            ++i;
            continue;
        }
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string unquote(std::string_view v, const std::string& where) {
    v = strip(v);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                const char c = v[++i];
                out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
            } else {
                out.push_back(v[i]);
            }
        }
        return out;
    }
    if (!v.empty() && v.front() == '"') throw ConfigError(where + ": unterminated string");
    return std::string(v);
}

std::vector<std::string> parse_list(std::string_view v, const std::string& where) {
    v = strip(v);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError(where + ": unterminated list");
        v = v.substr(1, v.size() - 2);
    }
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const char c = v[i];
        if (quoted && c == '\\' && i + 1 < v.size()) {
            cur.push_back(c);
            cur.push_back(v[++i]);
            continue;
        }
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            if (auto s = unquote(cur, where); !s.empty()) out.push_back(std::move(s));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (auto s = unquote(cur, where); !s.empty()) out.push_back(std::move(s));
    return out;
}

std::string render_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

template <typename T>
T parse_int(const std::string& v, const std::string& key) {
    T out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& v, const std::string& key) {
    // Fractions like 1/3 are accepted for ratio settings.
    if (const auto slash = v.find('/'); slash != std::string::npos) {
        return parse_double(v.substr(0, slash), key) / parse_double(v.substr(slash + 1), key);
    }
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string render_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += render_string(items[i]);
    }
    return out + "]";
}

// Shortest text that parses back to the same double.
std::string render_double(double d) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, d);
    std::string out(buf, r.ptr);
    if (out.find_first_of(".en") == std::string::npos) out += ".0";
    return out;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string& raw, const std::string& key)> set;
    std::function<std::string(const PipelineConfig&)> get;
    bool is_path = false;
};

template <typename Get>
Field string_field(Get g, bool is_path = false) {
    return {[g](PipelineConfig& c, const std::string& raw, const std::string& key) { g(c) = unquote(raw, key); },
            [g](const PipelineConfig& c) { return render_string(g(const_cast<PipelineConfig&>(c))); }, is_path};
}

template <typename Get>
Field list_field(Get g, bool is_path = false) {
    return {[g](PipelineConfig& c, const std::string& raw, const std::string& key) { g(c) = parse_list(raw, key); },
            [g](const PipelineConfig& c) { return render_list(g(const_cast<PipelineConfig&>(c))); }, is_path};
}

template <typename T, typename Get>
Field int_field(Get g) {
    return {[g](PipelineConfig& c, const std::string& raw, const std::string& key) {
                g(c) = parse_int<T>(unquote(raw, key), key);
            },
            [g](const PipelineConfig& c) { return std::to_string(g(const_cast<PipelineConfig&>(c))); }};
}

template <typename Get>
Field double_field(Get g) {
    return {[g](PipelineConfig& c, const std::string& raw, const std::string& key) {
                g(c) = parse_double(unquote(raw, key), key);
            },
            [g](const PipelineConfig& c) { return render_double(g(const_cast<PipelineConfig&>(c))); }};
}

template <typename Get>
Field bool_field(Get g) {
    return {[g](PipelineConfig& c, const std::string& raw, const std::string& key) {
                g(c) = parse_bool(unquote(raw, key), key);
            },
            [g](const PipelineConfig& c) { return std::string(g(const_cast<PipelineConfig&>(c)) ? "true" : "false"); }};
}

#define WEAVE_REF(expr) [](PipelineConfig& c) -> auto& { return c.expr; }

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        {"run.inputs", list_field(WEAVE_REF(inputs), true)},
        {"run.work_dir", string_field(WEAVE_REF(work_dir), true)},
        {"run.out_dir", string_field(WEAVE_REF(out_dir), true)},
        {"run.seed", int_field<std::uint64_t>(WEAVE_REF(seed))},
        {"run.threads", int_field<int>(WEAVE_REF(threads))},
        {"run.stub_mode", bool_field(WEAVE_REF(stub_mode))},
        {"run.sidecar", string_field(WEAVE_REF(sidecar))},
        {"run.embed_dim", int_field<int>(WEAVE_REF(embed_dim))},
        {"run.lang_allow", list_field(WEAVE_REF(lang_allow))},
        {"run.lang_deny", list_field(WEAVE_REF(lang_deny))},

        {"extract.min_doc_bytes", int_field<std::size_t>(WEAVE_REF(extract.min_doc_bytes))},
        {"extract.min_text_nodes", int_field<std::size_t>(WEAVE_REF(extract.min_text_nodes))},
        {"extract.max_image_nodes", int_field<std::size_t>(WEAVE_REF(extract.max_image_nodes))},

        {"lid.top_k", int_field<std::size_t>(WEAVE_REF(lid.top_k))},
        {"lid.retries", int_field<int>(WEAVE_REF(lid.retries))},

        {"text.min_bytes_latin", int_field<std::size_t>(WEAVE_REF(node.min_bytes_latin))},
        {"text.min_bytes_nonlatin", int_field<std::size_t>(WEAVE_REF(node.min_bytes_nonlatin))},
        {"text.min_bytes_post", int_field<std::size_t>(WEAVE_REF(node.min_bytes_post))},
        {"text.min_bytes_post_clean", int_field<std::size_t>(WEAVE_REF(node.min_bytes_post_clean))},
        {"text.digit_ratio_max", double_field(WEAVE_REF(node.digit_ratio_max))},
        {"text.nonalpha_ratio_max", double_field(WEAVE_REF(node.nonalpha_ratio_max))},
        {"text.caps_ratio_max", double_field(WEAVE_REF(node.caps_ratio_max))},
        {"text.char_dominance_max", double_field(WEAVE_REF(node.char_dominance_max))},
        {"text.angle_symbol_max", int_field<std::size_t>(WEAVE_REF(node.angle_symbol_max))},
        {"text.max_dates", int_field<std::size_t>(WEAVE_REF(node.max_dates))},
        {"text.banned_substrings", list_field(WEAVE_REF(node.banned_substrings))},
        {"text.banned_exact", list_field(WEAVE_REF(node.banned_exact))},
        {"text.date_patterns", list_field(WEAVE_REF(node.date_patterns))},
        {"text.nsfw_wordlist", string_field(WEAVE_REF(nsfw_wordlist), true)},
        {"text.min_doc_nodes", int_field<std::size_t>(WEAVE_REF(doc_min_text_nodes))},
        {"text.min_doc_chars", int_field<std::size_t>(WEAVE_REF(doc_min_chars))},

        {"dedup.lev_threshold", double_field(WEAVE_REF(node_dedup.threshold))},
        {"dedup.lev_convention",
         {[](PipelineConfig& c, const std::string& raw, const std::string& key) {
              const std::string v = unquote(raw, key);
              if (v == "max_len") c.node_dedup.convention = LevConvention::max_len;
              else if (v == "indel") c.node_dedup.convention = LevConvention::indel;
              else throw ConfigError(key + ": expected max_len or indel");
          },
          [](const PipelineConfig& c) {
              return render_string(c.node_dedup.convention == LevConvention::indel ? "indel" : "max_len");
          }}},
        {"dedup.threshold", double_field(WEAVE_REF(lsh.threshold))},
        {"dedup.perms", int_field<std::size_t>(WEAVE_REF(lsh.num_perm))},
        {"dedup.features", int_field<std::uint64_t>(WEAVE_REF(lsh.num_features))},
        {"dedup.seed", int_field<std::uint64_t>(WEAVE_REF(lsh.seed))},

        {"fetch.mode", string_field(WEAVE_REF(fetch_mode))},
        {"fetch.mirror_dir", string_field(WEAVE_REF(mirror_dir), true)},
        {"fetch.image_store", string_field(WEAVE_REF(image_store), true)},
        {"fetch.threads", int_field<int>(WEAVE_REF(fetch_threads))},
        {"fetch.user_agent", string_field(WEAVE_REF(fetch.user_agent))},
        {"fetch.per_host_concurrency", int_field<int>(WEAVE_REF(fetch.per_host_concurrency))},
        {"fetch.per_host_delay_ms", int_field<int>(WEAVE_REF(fetch.per_host_delay_ms))},
        {"fetch.timeout_ms", int_field<int>(WEAVE_REF(fetch.timeout_ms))},
        {"fetch.max_bytes", int_field<std::int64_t>(WEAVE_REF(fetch.max_bytes))},
        {"fetch.respect_robots", bool_field(WEAVE_REF(fetch.respect_robots))},
        {"fetch.retries", int_field<int>(WEAVE_REF(fetch.retries))},
        {"fetch.backoff_ms", int_field<int>(WEAVE_REF(fetch.backoff_ms))},
        {"fetch.max_redirects", int_field<int>(WEAVE_REF(fetch.max_redirects))},
        {"fetch.robots_ttl_s", int_field<int>(WEAVE_REF(fetch.robots_ttl_s))},

        {"images.min_side", int_field<int>(WEAVE_REF(image_rules.min_side))},
        {"images.aspect_min", double_field(WEAVE_REF(image_rules.aspect_min))},
        {"images.aspect_max", double_field(WEAVE_REF(image_rules.aspect_max))},
        {"images.url_banned_substrings", list_field(WEAVE_REF(image_rules.url_banned_substrings))},
        {"images.name_banned_exact", list_field(WEAVE_REF(image_rules.name_banned_exact))},
        {"images.porn_hentai_sum", double_field(WEAVE_REF(nsfw.porn_hentai_sum))},
        {"images.nudenet_exposed", double_field(WEAVE_REF(nsfw.nudenet_exposed))},
        {"images.safer_porn", double_field(WEAVE_REF(nsfw.safer_porn))},
        {"images.csam", double_field(WEAVE_REF(nsfw.csam))},
        {"images.cap", int_field<std::size_t>(WEAVE_REF(image_cap))},
        {"images.contamination", string_field(WEAVE_REF(contamination), true)},

        {"joint.negatives", int_field<int>(WEAVE_REF(joint.negatives))},
        {"joint.top", int_field<int>(WEAVE_REF(joint.top))},
        {"joint.pool_cap", int_field<std::size_t>(WEAVE_REF(joint.pool_cap))},
        {"joint.length_tolerance", double_field(WEAVE_REF(joint.length_tolerance))},
        {"joint.two_pass", bool_field(WEAVE_REF(joint.two_pass))},
        {"joint.min_doc_bytes", int_field<std::size_t>(WEAVE_REF(joint.min_doc_bytes))},

        {"shard.max_docs_per_file", int_field<std::size_t>(WEAVE_REF(shard_max_docs))},

        {"plan.dump", int_field<int>(WEAVE_REF(plan_dump))},
        {"plan.counts", string_field(WEAVE_REF(plan_counts), true)},
        {"plan.top_k", int_field<std::size_t>(WEAVE_REF(plan_top_k))},
        {"plan.threshold", int_field<std::uint64_t>(WEAVE_REF(plan_threshold))},
    };
    return table;
}

#undef WEAVE_REF

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& source) {
    KeyValueFile out;
    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = strip(drop_comment(text.substr(pos, eol - pos)));
        pos = eol + 1;
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        if (line.empty()) continue;
        if (line.front() == '[' && line.find('=') == std::string_view::npos) {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = std::string(strip(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        const std::string key(strip(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        out.values_[section.empty() ? key : section + "." + key] = std::string(strip(line.substr(eq + 1)));
    }
    return out;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse(text, path.string());
}

std::string env_name_for_key(std::string_view key, std::string_view prefix) {
    std::string out(prefix);
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (key[i] == '.') out += "__";
        else out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(key[i]))));
    }
    return out;
}

std::vector<std::string> PipelineConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
}

std::map<std::string, std::string> PipelineConfig::to_map() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, f] : fields()) out[k] = f.get(*this);
    return out;
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
    return out;
}

void PipelineConfig::apply(const std::map<std::string, std::string>& values) {
    const auto& table = fields();
    for (const auto& [k, v] : values) {
        const auto it = table.find(k);
        if (it == table.end()) throw ConfigError("unknown configuration key '" + k + "'");
        it->second.set(*this, v, k);
    }
}

void PipelineConfig::apply_env(std::string_view prefix) {
    std::map<std::string, std::string> values;
    for (const auto& [k, f] : fields()) {
        if (const char* v = std::getenv(env_name_for_key(k, prefix).c_str())) values[k] = v;
    }
    apply(values);
}

void PipelineConfig::resolve_paths(const std::filesystem::path& base) {
    auto fix = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    for (auto& p : inputs) fix(p);
    fix(work_dir);
    fix(out_dir);
    fix(nsfw_wordlist);
    fix(mirror_dir);
    fix(image_store);
    fix(contamination);
    fix(plan_counts);
}

void PipelineConfig::validate() const {
    auto ratio = [](double v, const char* name) {
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in (0,1]");
    };
    ratio(node.digit_ratio_max, "text.digit_ratio_max");
    ratio(node.nonalpha_ratio_max, "text.nonalpha_ratio_max");
    ratio(node.caps_ratio_max, "text.caps_ratio_max");
    ratio(node.char_dominance_max, "text.char_dominance_max");
    ratio(node_dedup.threshold, "dedup.lev_threshold");
    if (!(lsh.threshold > 0.0 && lsh.threshold < 1.0)) throw ConfigError("dedup.threshold must be in (0,1)");
    if (lsh.num_perm == 0 || lsh.num_features == 0) throw ConfigError("dedup.perms and dedup.features must be positive");
    for (double t : {nsfw.porn_hentai_sum, nsfw.nudenet_exposed, nsfw.safer_porn, nsfw.csam}) {
        if (!(t > 0.0 && t < 1.0)) throw ConfigError("image safety thresholds must be in (0,1)");
    }
    if (image_rules.min_side < 1) throw ConfigError("images.min_side must be >= 1");
    if (!(image_rules.aspect_min > 0.0 && image_rules.aspect_min <= image_rules.aspect_max)) {
        throw ConfigError("images.aspect_min must be positive and <= images.aspect_max");
    }
    if (joint.negatives < 0 || joint.top < 1) throw ConfigError("joint.negatives must be >= 0 and joint.top >= 1");
    if (embed_dim < 2) throw ConfigError("run.embed_dim must be >= 2");
    if (threads < 0 || fetch_threads < 1) throw ConfigError("thread counts must be positive");
    if (fetch_mode != "http" && fetch_mode != "directory") throw ConfigError("fetch.mode must be http or directory");
    if (fetch_mode == "directory" && mirror_dir.empty()) throw ConfigError("fetch.mirror_dir is required in directory mode");
    if (!stub_mode && sidecar.empty()) throw ConfigError("run.sidecar is required unless run.stub_mode = true");
    if (plan_dump < 1) throw ConfigError("plan.dump must be >= 1");
    if (shard_max_docs == 0) throw ConfigError("shard.max_docs_per_file must be positive");
    fetch.validate();
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path, std::string_view env_prefix) {
    PipelineConfig cfg;
    cfg.apply(KeyValueFile::load(path).values());
    cfg.apply_env(env_prefix);
    cfg.resolve_paths(std::filesystem::absolute(path).parent_path());
    cfg.validate();
    return cfg;
}

std::vector<LanguageSelection> per_language_extraction_plan(std::size_t dumps,
                                                            const std::map<std::string, std::uint64_t>& counts,
                                                            std::size_t top_k, std::uint64_t threshold) {
    std::vector<LanguageSelection> plan(dumps);
    if (counts.empty()) return plan;

    std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t d = 1; d < dumps; ++d) {
        if (d == 1) {
            for (std::size_t i = 0; i < top_k && i < ranked.size(); ++i) plan[d].exclude.insert(ranked[i].first);
        } else {
            for (const auto& [lang, n] : counts) {
                if (n >= threshold) plan[d].exclude.insert(lang);
            }
        }
    }
    return plan;
}

}  // namespace weave
