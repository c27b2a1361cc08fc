#include "weave/warc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "weave/error.hpp"
#include "weave/gzip.hpp"
#include "weave/stats.hpp"

namespace weave {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_warc_version_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line == "WARC/1.0" || line == "WARC/1.1";
}

std::string dechunk(std::string_view body) {
    std::string out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        const auto eol = body.find("\r\n", pos);
        if (eol == std::string_view::npos) break;
        std::size_t size = 0;
        const auto line = trim(body.substr(pos, eol - pos));
        const auto hex_end = line.find(';');
        const auto hex = line.substr(0, hex_end);
        const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), size, 16);
        if (ec != std::errc()) return std::string(body);
        pos = eol + 2;
        if (size == 0) break;
        out.append(body.substr(pos, size));
        pos += size + 2;
    }
    return out;
}

}  // namespace

const std::string* HttpMessage::header(const std::string& name) const {
    auto it = headers.find(name);
    return it == headers.end() ? nullptr : &it->second;
}

std::optional<HttpMessage> parse_http_response(std::string_view raw) {
    if (!raw.starts_with("HTTP/")) return std::nullopt;
    HttpMessage msg;
    std::size_t header_end = raw.find("\r\n\r\n");
    std::size_t sep = 4;
    if (header_end == std::string_view::npos) {
        header_end = raw.find("\n\n");
        sep = 2;
    }
    const std::string_view head = raw.substr(0, header_end == std::string_view::npos ? raw.size() : header_end);
    msg.body = header_end == std::string_view::npos ? std::string() : std::string(raw.substr(header_end + sep));

    std::size_t pos = 0;
    bool first = true;
    while (pos <= head.size()) {
        auto eol = head.find('\n', pos);
        if (eol == std::string_view::npos) eol = head.size();
        const auto line = trim(head.substr(pos, eol - pos));
        if (first) {
            const auto sp = line.find(' ');
            if (sp != std::string_view::npos) {
                const auto code = line.substr(sp + 1, 3);
                std::from_chars(code.data(), code.data() + code.size(), msg.status);
            }
            first = false;
        } else if (const auto colon = line.find(':'); colon != std::string_view::npos) {
            msg.headers[lower(trim(line.substr(0, colon)))] = std::string(trim(line.substr(colon + 1)));
        }
        pos = eol + 1;
    }

    if (const auto* te = msg.header("transfer-encoding"); te && lower(*te).find("chunked") != std::string::npos) {
        msg.body = dechunk(msg.body);
    }
    if (const auto* ce = msg.header("content-encoding")) {
        const auto enc = lower(*ce);
        if (enc == "gzip" || enc == "x-gzip" || enc == "deflate") {
            try {
                msg.body = gzip_decompress(msg.body);
            } catch (const Error&) {
                // Already-decoded payloads (as archived by some crawlers) keep their bytes.
            }
        }
    }
    return msg;
}

bool is_html_content_type(std::string_view ct) {
    const auto l = lower(trim(ct));
    return l.starts_with("text/html") || l.starts_with("application/xhtml+xml");
}

WarcReader::WarcReader(const std::filesystem::path& path) : in_(std::make_unique<GzReader>(path)) {}

WarcReader::~WarcReader() = default;

bool WarcReader::ensure(std::size_t n) {
    while (buf_.size() - pos_ < n && !eof_) {
        const std::size_t old = buf_.size();
        buf_.resize(old + (1 << 16));
        std::size_t got = 0;
        try {
            got = in_->read(buf_.data() + old, 1 << 16);
        } catch (const Error&) {
            // A corrupt compressed member ends the readable part of the file.
            ++corrupt_;
            got = 0;
        }
        buf_.resize(old + got);
        if (got == 0) eof_ = true;
    }
    return buf_.size() - pos_ >= n;
}

bool WarcReader::read_line(std::string& line) {
    for (;;) {
        const auto nl = buf_.find('\n', pos_);
        if (nl != std::string::npos) {
            line.assign(buf_, pos_, nl - pos_);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            pos_ = nl + 1;
            return true;
        }
        if (eof_) {
            if (pos_ >= buf_.size()) return false;
            line.assign(buf_, pos_, std::string::npos);
            pos_ = buf_.size();
            return true;
        }
        ensure(buf_.size() - pos_ + 1);
    }
}

bool WarcReader::resync(std::size_t from) {
    // `from` always follows a '\n', so a record boundary shows up as "\nWARC/1.x".
    std::size_t search = from == 0 ? 0 : from - 1;
    for (;;) {
        std::size_t best = std::string::npos;
        for (std::string_view marker : {"\nWARC/1.0", "\nWARC/1.1"}) {
            for (std::size_t p = buf_.find(marker, search); p != std::string::npos; p = buf_.find(marker, p + 1)) {
                const std::size_t after = p + marker.size();
                if (after < buf_.size() && (buf_[after] == '\r' || buf_[after] == '\n')) {
                    best = std::min(best, p);
                    break;
                }
            }
        }
        if (best != std::string::npos) {
            pos_ = best + 1;
            return true;
        }
        if (eof_) {
            pos_ = buf_.size();
            return false;
        }
        // Keep a small tail so a marker straddling the refill is still found.
        search = std::max(search, buf_.size() > 16 ? buf_.size() - 16 : 0);
        ensure(buf_.size() - pos_ + (1 << 16));
    }
}

bool WarcReader::next(WarcRecordRef& out) {
    std::string line;
    for (;;) {
        // Offsets are only held within one record, so compacting here is safe.
        if (pos_ > (1u << 20)) {
            buf_.erase(0, pos_);
            pos_ = 0;
        }
        // Skip blank separator lines.
        do {
            if (!read_line(line)) return false;
        } while (line.empty());

        const std::size_t record_start = pos_;
        if (!is_warc_version_line(line)) {
            ++corrupt_;
            if (!resync(record_start)) return false;
            continue;
        }

        std::map<std::string, std::string> headers;
        bool headers_ok = false;
        while (read_line(line)) {
            if (line.empty()) {
                headers_ok = true;
                break;
            }
            if (is_warc_version_line(line)) break;
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            headers[lower(trim(std::string_view(line).substr(0, colon)))] =
                std::string(trim(std::string_view(line).substr(colon + 1)));
        }
        std::size_t length = 0;
        bool length_ok = false;
        if (auto it = headers.find("content-length"); it != headers.end()) {
            const auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), length);
            length_ok = ec == std::errc() && ptr == it->second.data() + it->second.size();
        }
        if (!headers_ok || !length_ok) {
            ++corrupt_;
            if (!resync(record_start)) return false;
            continue;
        }

        const std::size_t payload_start = pos_;
        const bool complete = ensure(length + 4);
        const bool trailer_ok = complete && buf_.compare(pos_ + length, 4, "\r\n\r\n") == 0;
        const bool short_trailer_ok =
            !complete && ensure(length) && (buf_.size() - pos_ == length ||
                                            std::string_view(buf_).substr(pos_ + length).find_first_not_of("\r\n") ==
                                                std::string_view::npos);
        if (!trailer_ok && !short_trailer_ok) {
            ++corrupt_;
            if (!resync(payload_start)) return false;
            continue;
        }

        out.warc_type = headers["warc-type"];
        out.record_id = headers["warc-record-id"];
        out.target_uri = headers["warc-target-uri"];
        out.identified_payload_type = headers["warc-identified-payload-type"];
        out.content_type = headers["content-type"];
        out.payload.assign(buf_, pos_, length);
        pos_ = trailer_ok ? pos_ + length + 4 : buf_.size();
        return true;
    }
}

bool WarcReader::next_html_response(WarcRecordRef& out) {
    while (next(out)) {
        if (out.warc_type != "response") continue;
        const auto msg_end = out.payload.find("\r\n\r\n");
        const auto http = parse_http_response(std::string_view(out.payload).substr(
            0, msg_end == std::string::npos ? out.payload.size() : msg_end + 4));
        std::string ct;
        if (http) {
            if (const auto* h = http->header("content-type")) ct = *h;
        }
        if (ct.empty()) ct = out.identified_payload_type;
        if (!is_html_content_type(ct)) continue;
        out.content_type = ct;
        return true;
    }
    return false;
}

void iterate_records(const std::filesystem::path& path, const std::function<void(WarcRecordRef&&)>& fn,
                     StageCounter* corrupt) {
    WarcReader reader(path);
    WarcRecordRef rec;
    while (reader.next_html_response(rec)) fn(std::move(rec));
    if (corrupt != nullptr && reader.corrupt_records() > 0) {
        corrupt->add_in(reader.corrupt_records());
        corrupt->drop("corrupt_record", reader.corrupt_records());
    }
}

}  // namespace weave
