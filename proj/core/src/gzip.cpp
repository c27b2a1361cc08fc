#include "weave/gzip.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>

#include "weave/error.hpp"

namespace weave {

namespace {

gzFile as_gz(void* p) { return static_cast<gzFile>(p); }

}  // namespace

GzReader::GzReader(const std::filesystem::path& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (file_ == nullptr) throw Error("cannot open " + path.string());
    gzbuffer(as_gz(file_), 1 << 17);
}

GzReader::~GzReader() {
    if (file_ != nullptr) gzclose(as_gz(file_));
}

bool GzReader::fill() {
    if (eof_) return false;
    buf_.erase(0, pos_);
    pos_ = 0;
    const std::size_t old = buf_.size();
    buf_.resize(old + (1 << 16));
    const int n = gzread(as_gz(file_), buf_.data() + old, 1 << 16);
    if (n < 0) {
        int errnum = 0;
        const char* msg = gzerror(as_gz(file_), &errnum);
        throw Error(path_.string() + ": " + (msg ? msg : "read error"));
    }
    buf_.resize(old + static_cast<std::size_t>(n));
    if (n == 0) {
        eof_ = true;
        int errnum = 0;
        const char* msg = gzerror(as_gz(file_), &errnum);
        if (errnum != Z_OK) throw Error(path_.string() + ": truncated or corrupt gzip stream (" + (msg ? msg : "") + ")");
        return false;
    }
    return true;
}

std::size_t GzReader::read(char* out, std::size_t n) {
    std::size_t copied = 0;
    while (copied < n) {
        if (pos_ == buf_.size() && !fill()) break;
        const std::size_t take = std::min(n - copied, buf_.size() - pos_);
        std::copy_n(buf_.data() + pos_, take, out + copied);
        pos_ += take;
        copied += take;
    }
    return copied;
}

bool GzReader::getline(std::string& line) {
    line.clear();
    for (;;) {
        const std::size_t nl = buf_.find('\n', pos_);
        if (nl != std::string::npos) {
            line.append(buf_, pos_, nl - pos_);
            pos_ = nl + 1;
            return true;
        }
        line.append(buf_, pos_, std::string::npos);
        pos_ = buf_.size();
        if (!fill()) return !line.empty();
    }
}

GzWriter::GzWriter(std::filesystem::path path, int level) : path_(std::move(path)) {
    tmp_ = path_;
    tmp_ += ".tmp";
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    const std::string mode = "wb" + std::to_string(level);
    file_ = gzopen(tmp_.c_str(), mode.c_str());
    if (file_ == nullptr) throw Error("cannot create " + tmp_.string());
}

GzWriter::~GzWriter() {
    if (file_ != nullptr) gzclose(as_gz(file_));
    if (!committed_) {
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void GzWriter::write(std::string_view bytes) {
    if (bytes.empty()) return;
    const int n = gzwrite(as_gz(file_), bytes.data(), static_cast<unsigned>(bytes.size()));
    if (n <= 0 || static_cast<std::size_t>(n) != bytes.size()) throw Error("write failed: " + tmp_.string());
    raw_bytes_ += bytes.size();
}

void GzWriter::commit() {
    const int rc = gzclose(as_gz(file_));
    file_ = nullptr;
    if (rc != Z_OK) throw Error("close failed: " + tmp_.string());
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot create " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string gzip_compress(std::string_view bytes, int level) {
    z_stream zs{};
    if (deflateInit2(&zs, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) throw Error("deflateInit2 failed");
    std::string out(deflateBound(&zs, bytes.size()) + 32, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("deflate failed");
    out.resize(zs.total_out);
    return out;
}

std::string gzip_decompress(std::string_view bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw Error("inflateInit2 failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    std::string out;
    char chunk[1 << 14];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(chunk);
        zs.avail_out = sizeof(chunk);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error("inflate failed");
        }
        out.append(chunk, sizeof(chunk) - zs.avail_out);
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw Error("truncated gzip stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace weave
