#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace weave {

using LidResult = std::vector<std::pair<std::string, double>>;
using Embedding = std::vector<float>;
using ScoreMap = std::map<std::string, double>;

/// Per-item outcome of a scorer call: a value, or an error string.
template <typename T>
struct Scored {
    std::optional<T> value;
    std::string error;

    bool ok() const { return value.has_value(); }
    static Scored success(T v) { return Scored{std::move(v), {}}; }
    static Scored failure(std::string e) { return Scored{std::nullopt, std::move(e)}; }
};

/// Model-backed scores used by language identification, image safety
/// gating and joint filtering. Batch calls return one entry per input, in
/// input order.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual std::vector<Scored<LidResult>> lid(std::span<const std::string> texts) = 0;
    virtual std::vector<Scored<Embedding>> embed_text(std::span<const std::string> texts) = 0;
    virtual std::vector<Scored<Embedding>> embed_image(std::span<const std::string> paths) = 0;
    virtual std::vector<Scored<ScoreMap>> nsfw_image(std::span<const std::string> paths) = 0;
    virtual std::vector<Scored<ScoreMap>> csam_image(std::span<const std::string> paths) = 0;
};

/// Deterministic embedding shared with the sidecar's stub mode:
/// c_i = u_i / 2^63 - 1 where u_i is the first 8 bytes (little-endian) of
/// SHA-256(input || le32(i)); the vector is L2-normalized in double precision
/// and rounded to single precision.
Embedding stub_embed(std::string_view input, int dim);

/// Deterministic top-3 language guess: index = le64(SHA-256(text)) mod |table|,
/// p = 0.8 for it, 0.15 for the next table entry, 0.05 for the previous one.
LidResult stub_lid(std::string_view text);

/// In-process implementation of the sidecar stub mode. Image embeddings hash
/// the image file bytes; safety scores are all zero.
class StubScorer : public Scorer {
public:
    explicit StubScorer(int dim = 64);

    std::vector<Scored<LidResult>> lid(std::span<const std::string> texts) override;
    std::vector<Scored<Embedding>> embed_text(std::span<const std::string> texts) override;
    std::vector<Scored<Embedding>> embed_image(std::span<const std::string> paths) override;
    std::vector<Scored<ScoreMap>> nsfw_image(std::span<const std::string> paths) override;
    std::vector<Scored<ScoreMap>> csam_image(std::span<const std::string> paths) override;

    int dim() const { return dim_; }

private:
    int dim_;
};

/// Wire protocol helpers (newline-delimited JSON).
namespace protocol {

enum class Op { lid, embed_text, embed_image, nsfw_image, csam_image, ping };

std::string_view op_name(Op op);
std::optional<Op> parse_op(std::string_view name);

/// Shortest decimal string that round-trips the single-precision value.
std::string format_f32(float v);

std::string encode_request(std::uint64_t id, Op op, std::string_view arg);

/// Serializes a response line with single-precision number formatting.
std::string encode_ok(std::uint64_t id, const nlohmann::json& result);
std::string encode_error(std::uint64_t id, std::string_view error);

nlohmann::json lid_to_json(const LidResult& r);
nlohmann::json embedding_to_json(const Embedding& e);
nlohmann::json scores_to_json(const ScoreMap& m);

LidResult lid_from_json(const nlohmann::json& j);
Embedding embedding_from_json(const nlohmann::json& j);
ScoreMap scores_from_json(const nlohmann::json& j);

/// Answers one request line using `scorer`; the reply for malformed input
/// carries id 0 and error "parse". Used by in-process test servers.
std::string handle_request(Scorer& scorer, std::string_view line);

}  // namespace protocol

}  // namespace weave
