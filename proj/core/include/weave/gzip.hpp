#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace weave {

/// Streaming reader for gzip files (multi-member aware). Plain, uncompressed
/// files are passed through unchanged. A truncated compressed stream raises
/// weave::Error instead of silently ending.
class GzReader {
public:
    explicit GzReader(const std::filesystem::path& path);
    ~GzReader();
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    /// Reads up to `n` bytes; returns 0 at end of stream.
    std::size_t read(char* buf, std::size_t n);

    /// Reads one line without its terminating '\n'. Returns false at EOF.
    bool getline(std::string& line);

private:
    bool fill();

    void* file_ = nullptr;
    std::string buf_;
    std::size_t pos_ = 0;
    bool eof_ = false;
    std::filesystem::path path_;
};

/// Writes a gzip file atomically: data goes to a temporary sibling that is
/// renamed into place by commit(). Destroying an uncommitted writer removes
/// the temporary, so a failed write never leaves a partial file behind.
class GzWriter {
public:
    explicit GzWriter(std::filesystem::path path, int level = 6);
    ~GzWriter();
    GzWriter(const GzWriter&) = delete;
    GzWriter& operator=(const GzWriter&) = delete;

    void write(std::string_view bytes);
    void commit();
    std::size_t bytes_written() const { return raw_bytes_; }

private:
    void* file_ = nullptr;
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::size_t raw_bytes_ = 0;
    bool committed_ = false;
};

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// gzip-compresses / inflates an in-memory buffer.
std::string gzip_compress(std::string_view bytes, int level = 6);
std::string gzip_decompress(std::string_view bytes);

}  // namespace weave
