#ifndef BVN_SHA256_HPP
#define BVN_SHA256_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

namespace bvn {

/// 256-bit digest. The build-wide hash algorithm is SHA-256; snapshot
/// headers name it so a reader can tell what produced the hex strings.
using Digest = std::array<std::uint8_t, 32>;

inline constexpr const char* kHashAlgorithmName = "sha256";

/// All-zero digest used as the genesis link of a hash chain.
inline constexpr Digest kZeroDigest{};

inline Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr ||
        EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest computation failed");
    }
    EVP_MD_CTX_free(ctx);
    return out;
}

inline Digest sha256(const std::vector<std::uint8_t>& data) {
    return sha256(std::span<const std::uint8_t>(data));
}

/// Digest of the concatenation a ‖ b.
inline Digest sha256_pair(const Digest& a, const Digest& b) {
    std::array<std::uint8_t, 64> buf{};
    std::copy(a.begin(), a.end(), buf.begin());
    std::copy(b.begin(), b.end(), buf.begin() + 32);
    return sha256(std::span<const std::uint8_t>(buf.data(), buf.size()));
}

inline std::string to_hex(const Digest& d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (std::uint8_t b : d) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0x0f]);
    }
    return s;
}

inline Digest digest_from_hex(const std::string& hex) {
    if (hex.size() != 64) {
        throw std::invalid_argument("digest hex must be 64 characters");
    }
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
        throw std::invalid_argument("invalid hex character in digest");
    };
    Digest d{};
    for (std::size_t i = 0; i < 32; ++i) {
        d[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return d;
}

}  // namespace bvn

#endif  // BVN_SHA256_HPP
