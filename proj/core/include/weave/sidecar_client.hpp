#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "weave/scorer.hpp"

namespace weave {

/// Where the inference sidecar lives: `tcp://host:port` (or bare
/// `host:port`), or `stdio:<command line>` to spawn it as a child process
/// speaking the protocol on stdin/stdout.
struct SidecarEndpoint {
    enum class Kind { tcp, stdio };

    Kind kind = Kind::tcp;
    std::string host = "127.0.0.1";
    int port = 9090;
    std::vector<std::string> command;

    static SidecarEndpoint parse(const std::string& spec);
};

struct SidecarOptions {
    std::size_t max_in_flight = 32;
    std::chrono::milliseconds timeout{30'000};
};

/// Scorer backed by the newline-delimited JSON sidecar. Requests of a batch
/// are pipelined with at most `max_in_flight` outstanding; responses may
/// arrive in any order and are matched by id. Calls are serialized, so one
/// client can be shared between threads.
class SidecarClient : public Scorer {
public:
    explicit SidecarClient(SidecarEndpoint endpoint, SidecarOptions options = {});
    ~SidecarClient() override;

    bool ping();

    std::vector<Scored<LidResult>> lid(std::span<const std::string> texts) override;
    std::vector<Scored<Embedding>> embed_text(std::span<const std::string> texts) override;
    std::vector<Scored<Embedding>> embed_image(std::span<const std::string> paths) override;
    std::vector<Scored<ScoreMap>> nsfw_image(std::span<const std::string> paths) override;
    std::vector<Scored<ScoreMap>> csam_image(std::span<const std::string> paths) override;

private:
    struct Reply {
        bool ok = false;
        nlohmann::json result;
        std::string error;
    };

    std::vector<Reply> call(protocol::Op op, std::span<const std::string> args);
    void connect();
    void disconnect();
    void send_line(const std::string& line);
    bool read_line(std::string& line);

    SidecarEndpoint endpoint_;
    SidecarOptions options_;
    std::mutex mu_;
    int read_fd_ = -1;
    int write_fd_ = -1;
    int child_pid_ = -1;
    std::string rbuf_;
    std::uint64_t next_id_ = 1;
};

}  // namespace weave
