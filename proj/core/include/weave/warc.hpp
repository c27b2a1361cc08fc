#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace weave {

class GzReader;
class StageCounter;

/// One WARC record. `payload` is the full record block, exactly
/// Content-Length bytes; for responses it is the raw HTTP message.
struct WarcRecordRef {
    std::string warc_type;
    std::string record_id;
    std::string target_uri;
    std::string content_type;  // HTTP Content-Type for responses, WARC Content-Type otherwise
    std::string identified_payload_type;
    std::string payload;
};

struct HttpMessage {
    int status = 0;
    std::map<std::string, std::string> headers;  // keys lowercased
    std::string body;

    const std::string* header(const std::string& lower_name) const;
};

/// Parses a raw HTTP response, de-chunking and gunzipping the body as
/// needed. Returns nullopt when no status line is present.
std::optional<HttpMessage> parse_http_response(std::string_view raw);

/// Sequential WARC/1.0 and WARC/1.1 reader over plain or gzip (including
/// per-record gzip) files. Corrupt or truncated records are skipped and the
/// reader resynchronizes on the next "WARC/1.x" line.
class WarcReader {
public:
    explicit WarcReader(const std::filesystem::path& path);
    ~WarcReader();
    WarcReader(const WarcReader&) = delete;
    WarcReader& operator=(const WarcReader&) = delete;

    /// Next well-formed record of any type.
    bool next(WarcRecordRef& out);

    /// Next `response` record with an HTML content type.
    bool next_html_response(WarcRecordRef& out);

    std::size_t corrupt_records() const { return corrupt_; }

private:
    bool ensure(std::size_t n);
    bool read_line(std::string& line);
    bool resync(std::size_t from);

    std::unique_ptr<GzReader> in_;
    std::string buf_;
    std::size_t pos_ = 0;
    bool eof_ = false;
    std::size_t corrupt_ = 0;
};

bool is_html_content_type(std::string_view content_type);

/// Iterates the HTML response records of `path` in file order. Skipped
/// corrupt records are counted on `corrupt` when provided.
void iterate_records(const std::filesystem::path& path, const std::function<void(WarcRecordRef&&)>& fn,
                     StageCounter* corrupt = nullptr);

}  // namespace weave
