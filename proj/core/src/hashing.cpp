#include "weave/hashing.hpp"

#include <openssl/evp.h>

#include "weave/error.hpp"

namespace weave {

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> digest(const EVP_MD* md, std::string_view bytes) {
    std::array<std::uint8_t, N> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, md, nullptr) != 1 || len != N) {
        throw Error("digest computation failed");
    }
    return out;
}

}  // namespace

Sha256Digest sha256(std::string_view bytes) { return digest<32>(EVP_sha256(), bytes); }

Sha512Digest sha512(std::string_view bytes) { return digest<64>(EVP_sha512(), bytes); }

struct Sha512Stream::Impl {
    EVP_MD_CTX* ctx = nullptr;
};

Sha512Stream::Sha512Stream() : impl_(std::make_unique<Impl>()) {
    impl_->ctx = EVP_MD_CTX_new();
    if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha512(), nullptr) != 1) {
        throw Error("sha512 init failed");
    }
}

Sha512Stream::~Sha512Stream() { EVP_MD_CTX_free(impl_->ctx); }

void Sha512Stream::update(std::string_view bytes) {
    if (EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size()) != 1) throw Error("sha512 update failed");
}

Sha512Digest Sha512Stream::finish() {
    Sha512Digest out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(impl_->ctx, out.data(), &len) != 1) throw Error("sha512 final failed");
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

std::uint64_t le_u64(std::span<const std::uint8_t> digest) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | digest[static_cast<std::size_t>(i)];
    return v;
}

}  // namespace weave
