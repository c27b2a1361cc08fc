#include "weave/scorer.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>

#include "weave/error.hpp"
#include "weave/gzip.hpp"
#include "weave/hashing.hpp"
#include "weave/languages.hpp"

namespace weave {

Embedding stub_embed(std::string_view input, int dim) {
    if (dim < 2) throw Error("stub_embed: dim must be >= 2");
    std::vector<double> c(static_cast<std::size_t>(dim));
    std::string buf(input);
    buf.resize(input.size() + 4);
    for (int i = 0; i < dim; ++i) {
        const auto u32 = static_cast<std::uint32_t>(i);
        for (int b = 0; b < 4; ++b) buf[input.size() + static_cast<std::size_t>(b)] = static_cast<char>((u32 >> (8 * b)) & 0xFF);
        const std::uint64_t u = le_u64(sha256(buf));
        c[static_cast<std::size_t>(i)] = static_cast<double>(u) / 9223372036854775808.0 - 1.0;
    }
    double norm2 = 0.0;
    for (double v : c) norm2 += v * v;
    if (norm2 == 0.0) {
        c[0] = 1.0;
        norm2 = 1.0;
    }
    const double norm = std::sqrt(norm2);
    Embedding out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = static_cast<float>(c[i] / norm);
    return out;
}

LidResult stub_lid(std::string_view text) {
    const auto table = language_table();
    const std::size_t n = table.size();
    const std::size_t idx = static_cast<std::size_t>(le_u64(sha256(text)) % n);
    return {{std::string(table[idx]), 0.8},
            {std::string(table[(idx + 1) % n]), 0.15},
            {std::string(table[(idx + n - 1) % n]), 0.05}};
}

StubScorer::StubScorer(int dim) : dim_(dim) {
    if (dim < 2) throw Error("stub scorer dim must be >= 2");
}

std::vector<Scored<LidResult>> StubScorer::lid(std::span<const std::string> texts) {
    std::vector<Scored<LidResult>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(t.empty() ? Scored<LidResult>::failure("empty") : Scored<LidResult>::success(stub_lid(t)));
    }
    return out;
}

std::vector<Scored<Embedding>> StubScorer::embed_text(std::span<const std::string> texts) {
    std::vector<Scored<Embedding>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(Scored<Embedding>::success(stub_embed(t, dim_)));
    return out;
}

std::vector<Scored<Embedding>> StubScorer::embed_image(std::span<const std::string> paths) {
    std::vector<Scored<Embedding>> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        try {
            out.push_back(Scored<Embedding>::success(stub_embed(read_file(p), dim_)));
        } catch (const Error& e) {
            out.push_back(Scored<Embedding>::failure("io"));
        }
    }
    return out;
}

namespace {

std::vector<Scored<ScoreMap>> zero_scores(std::span<const std::string> paths, std::initializer_list<const char*> keys) {
    std::vector<Scored<ScoreMap>> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        std::error_code ec;
        if (!std::filesystem::is_regular_file(p, ec)) {
            out.push_back(Scored<ScoreMap>::failure("io"));
            continue;
        }
        ScoreMap m;
        for (const char* k : keys) m[k] = 0.0;
        out.push_back(Scored<ScoreMap>::success(std::move(m)));
    }
    return out;
}

}  // namespace

std::vector<Scored<ScoreMap>> StubScorer::nsfw_image(std::span<const std::string> paths) {
    return zero_scores(paths, {"porn", "hentai", "nudenet_exposed_max", "safer_porn"});
}

std::vector<Scored<ScoreMap>> StubScorer::csam_image(std::span<const std::string> paths) {
    return zero_scores(paths, {"safer_csam"});
}

namespace protocol {

std::string_view op_name(Op op) {
    switch (op) {
        case Op::lid: return "lid";
        case Op::embed_text: return "embed_text";
        case Op::embed_image: return "embed_image";
        case Op::nsfw_image: return "nsfw_image";
        case Op::csam_image: return "csam_image";
        case Op::ping: return "ping";
    }
    return "ping";
}

std::optional<Op> parse_op(std::string_view name) {
    for (Op op : {Op::lid, Op::embed_text, Op::embed_image, Op::nsfw_image, Op::csam_image, Op::ping}) {
        if (op_name(op) == name) return op;
    }
    return std::nullopt;
}

std::string format_f32(float v) {
    if (!std::isfinite(v)) throw Error("non-finite float in protocol message");
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("float formatting failed");
    std::string s(buf, ptr);
    // Keep the token a JSON float: "1" -> "1.0", "1e-05" stays as-is.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string encode_request(std::uint64_t id, Op op, std::string_view arg) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["op"] = op_name(op);
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();
    switch (op) {
        case Op::lid:
        case Op::embed_text: payload["text"] = arg; break;
        case Op::embed_image:
        case Op::nsfw_image:
        case Op::csam_image: payload["path"] = arg; break;
        case Op::ping: break;
    }
    j["payload"] = std::move(payload);
    return j.dump();
}

namespace {

// Writes JSON with floats rendered via format_f32 (nlohmann would print the
// double expansion of the float instead).
void write_json(std::string& out, const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::number_float: out += format_f32(static_cast<float>(j.get<double>())); break;
        case nlohmann::json::value_t::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& e : j) {
                if (!first) out.push_back(',');
                write_json(out, e);
                first = false;
            }
            out.push_back(']');
            break;
        }
        case nlohmann::json::value_t::object: {
            out.push_back('{');
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out.push_back(',');
                out += nlohmann::json(k).dump();
                out.push_back(':');
                write_json(out, v);
                first = false;
            }
            out.push_back('}');
            break;
        }
        default: out += j.dump(); break;
    }
}

}  // namespace

std::string encode_ok(std::uint64_t id, const nlohmann::json& result) {
    std::string out = "{\"id\":" + std::to_string(id) + ",\"ok\":true,\"result\":";
    write_json(out, result);
    out += "}";
    return out;
}

std::string encode_error(std::uint64_t id, std::string_view error) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["ok"] = false;
    j["error"] = error;
    return j.dump();
}

nlohmann::json lid_to_json(const LidResult& r) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [code, p] : r) a.push_back(nlohmann::json::array({code, p}));
    return a;
}

nlohmann::json embedding_to_json(const Embedding& e) {
    nlohmann::json a = nlohmann::json::array();
    for (float v : e) a.push_back(static_cast<double>(v));
    return a;
}

nlohmann::json scores_to_json(const ScoreMap& m) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : m) o[k] = v;
    return o;
}

LidResult lid_from_json(const nlohmann::json& j) {
    LidResult r;
    for (const auto& pair : j) r.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
    return r;
}

Embedding embedding_from_json(const nlohmann::json& j) {
    Embedding e;
    e.reserve(j.size());
    for (const auto& v : j) e.push_back(static_cast<float>(v.get<double>()));
    return e;
}

ScoreMap scores_from_json(const nlohmann::json& j) {
    ScoreMap m;
    for (const auto& [k, v] : j.items()) m[k] = v.get<double>();
    return m;
}

std::string handle_request(Scorer& scorer, std::string_view line) {
    nlohmann::json req;
    try {
        req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        return encode_error(0, "parse");
    }
    if (!req.is_object() || !req.contains("id") || !req["id"].is_number_unsigned()) return encode_error(0, "parse");
    const auto id = req["id"].get<std::uint64_t>();
    const auto op = parse_op(req.value("op", std::string()));
    if (!op) return encode_error(id, "unknown_op");
    if (*op == Op::ping) return encode_ok(id, "pong");

    const auto payload = req.value("payload", nlohmann::json::object());
    const bool wants_text = *op == Op::lid || *op == Op::embed_text;
    const char* key = wants_text ? "text" : "path";
    if (!payload.is_object() || !payload.contains(key) || !payload[key].is_string()) return encode_error(id, "payload");
    const std::vector<std::string> arg{payload[key].get<std::string>()};

    switch (*op) {
        case Op::lid: {
            auto r = scorer.lid(arg).at(0);
            return r.ok() ? encode_ok(id, lid_to_json(*r.value)) : encode_error(id, r.error);
        }
        case Op::embed_text:
        case Op::embed_image: {
            auto r = (*op == Op::embed_text ? scorer.embed_text(arg) : scorer.embed_image(arg)).at(0);
            return r.ok() ? encode_ok(id, embedding_to_json(*r.value)) : encode_error(id, r.error);
        }
        case Op::nsfw_image:
        case Op::csam_image: {
            auto r = (*op == Op::nsfw_image ? scorer.nsfw_image(arg) : scorer.csam_image(arg)).at(0);
            return r.ok() ? encode_ok(id, scores_to_json(*r.value)) : encode_error(id, r.error);
        }
        case Op::ping: break;
    }
    return encode_error(id, "unknown_op");
}

}  // namespace protocol

}  // namespace weave
