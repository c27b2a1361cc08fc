#include "weave/sidecar_client.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include "weave/error.hpp"

namespace weave {

SidecarEndpoint SidecarEndpoint::parse(const std::string& spec) {
    SidecarEndpoint ep;
    if (spec.starts_with("stdio:")) {
        ep.kind = Kind::stdio;
        std::istringstream ss(spec.substr(6));
        std::string word;
        while (ss >> word) ep.command.push_back(word);
        if (ep.command.empty()) throw ConfigError("stdio sidecar endpoint needs a command");
        return ep;
    }
    std::string rest = spec.starts_with("tcp://") ? spec.substr(6) : spec;
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw ConfigError("sidecar endpoint must be host:port, got '" + spec + "'");
    ep.host = rest.substr(0, colon);
    const std::string port = rest.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
    if (ec != std::errc() || ptr != port.data() + port.size() || ep.host.empty() || ep.port <= 0 || ep.port > 65535) throw ConfigError("bad sidecar port in '" + spec + "'");
    return ep;
}

SidecarClient::SidecarClient(SidecarEndpoint endpoint, SidecarOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

SidecarClient::~SidecarClient() { disconnect(); }

void SidecarClient::connect() {
    if (read_fd_ >= 0) return;
    if (endpoint_.kind == SidecarEndpoint::Kind::tcp) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        const std::string port = std::to_string(endpoint_.port);
        if (getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &res) != 0) {
            throw Error("sidecar: cannot resolve " + endpoint_.host);
        }
        int fd = -1;
        for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
            fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        freeaddrinfo(res);
        if (fd < 0) throw Error("sidecar: cannot connect to " + endpoint_.host + ":" + port);
        read_fd_ = fd;
        write_fd_ = fd;
        return;
    }

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw Error("sidecar: pipe failed");
    const pid_t pid = fork();
    if (pid < 0) throw Error("sidecar: fork failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[1]);
        ::close(from_child[0]);
        std::vector<char*> argv;
        for (auto& a : endpoint_.command) argv.push_back(a.data());
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    child_pid_ = pid;
}

void SidecarClient::disconnect() {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = write_fd_ = -1;
    if (child_pid_ > 0) {
        ::kill(child_pid_, SIGTERM);
        ::waitpid(child_pid_, nullptr, 0);
        child_pid_ = -1;
    }
    rbuf_.clear();
}

void SidecarClient::send_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == ENOTSOCK) {
            const ssize_t w = ::write(write_fd_, data.data() + off, data.size() - off);
            if (w <= 0) throw Error("sidecar: write failed");
            off += static_cast<std::size_t>(w);
            continue;
        }
        if (n <= 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("sidecar: send failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

bool SidecarClient::read_line(std::string& line) {
    for (;;) {
        const auto nl = rbuf_.find('\n');
        if (nl != std::string::npos) {
            line = rbuf_.substr(0, nl);
            rbuf_.erase(0, nl + 1);
            return true;
        }
        pollfd pfd{read_fd_, POLLIN, 0};
        const int pr = ::poll(&pfd, 1, static_cast<int>(options_.timeout.count()));
        if (pr == 0) throw Error("sidecar: timed out waiting for response");
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw Error("sidecar: poll failed");
        }
        char chunk[1 << 15];
        const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        rbuf_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<SidecarClient::Reply> SidecarClient::call(protocol::Op op, std::span<const std::string> args) {
    std::lock_guard lock(mu_);
    std::vector<Reply> replies(args.size());
    if (args.empty()) return replies;
    try {
        connect();
        std::unordered_map<std::uint64_t, std::size_t> pending;
        std::size_t sent = 0;
        std::size_t received = 0;
        while (received < args.size()) {
            while (sent < args.size() && pending.size() < options_.max_in_flight) {
                const std::uint64_t id = next_id_++;
                pending.emplace(id, sent);
                send_line(protocol::encode_request(id, op, args[sent]));
                ++sent;
            }
            std::string line;
            if (!read_line(line)) throw Error("sidecar: connection closed");
            nlohmann::json resp;
            try {
                resp = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                throw Error("sidecar: malformed response line");
            }
            const auto id = resp.value("id", std::uint64_t{0});
            auto it = pending.find(id);
            if (it == pending.end()) {
                if (id == 0) throw Error("sidecar: rejected request (" + resp.value("error", std::string("?")) + ")");
                continue;  // stale id from an abandoned batch
            }
            Reply& r = replies[it->second];
            r.ok = resp.value("ok", false);
            if (r.ok) {
                r.result = resp.value("result", nlohmann::json());
            } else {
                r.error = resp.value("error", std::string("unknown"));
            }
            pending.erase(it);
            ++received;
        }
    } catch (const Error& e) {
        disconnect();
        for (auto& r : replies) {
            if (!r.ok && r.error.empty()) r.error = e.what();
        }
    }
    return replies;
}

bool SidecarClient::ping() {
    const std::vector<std::string> arg{""};
    const auto r = call(protocol::Op::ping, arg);
    return r[0].ok && r[0].result == "pong";
}

namespace {

template <typename T, typename F>
std::vector<Scored<T>> convert(const auto& replies, F&& from_json) {
    std::vector<Scored<T>> out;
    out.reserve(replies.size());
    for (const auto& r : replies) {
        if (!r.ok) {
            out.push_back(Scored<T>::failure(r.error));
            continue;
        }
        try {
            out.push_back(Scored<T>::success(from_json(r.result)));
        } catch (const nlohmann::json::exception&) {
            out.push_back(Scored<T>::failure("schema"));
        }
    }
    return out;
}

}  // namespace

std::vector<Scored<LidResult>> SidecarClient::lid(std::span<const std::string> texts) {
    return convert<LidResult>(call(protocol::Op::lid, texts), protocol::lid_from_json);
}

std::vector<Scored<Embedding>> SidecarClient::embed_text(std::span<const std::string> texts) {
    return convert<Embedding>(call(protocol::Op::embed_text, texts), protocol::embedding_from_json);
}

std::vector<Scored<Embedding>> SidecarClient::embed_image(std::span<const std::string> paths) {
    return convert<Embedding>(call(protocol::Op::embed_image, paths), protocol::embedding_from_json);
}

std::vector<Scored<ScoreMap>> SidecarClient::nsfw_image(std::span<const std::string> paths) {
    return convert<ScoreMap>(call(protocol::Op::nsfw_image, paths), protocol::scores_from_json);
}

std::vector<Scored<ScoreMap>> SidecarClient::csam_image(std::span<const std::string> paths) {
    return convert<ScoreMap>(call(protocol::Op::csam_image, paths), protocol::scores_from_json);
}

}  // namespace weave
