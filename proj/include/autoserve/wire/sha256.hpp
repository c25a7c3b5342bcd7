#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>

#include <openssl/evp.h>

namespace autoserve::wire {

using Sha256Digest = std::array<std::uint8_t, 32>;

/// SHA-256 over the concatenation of `parts`.
[[nodiscard]] inline Sha256Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts)
{
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) {
        throw std::bad_alloc();
    }
    Sha256Digest out{};
    unsigned len = 0;
    bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1;
    for (auto part : parts) {
        ok = ok && EVP_DigestUpdate(ctx, part.data(), part.size()) == 1;
    }
    ok = ok && EVP_DigestFinal_ex(ctx, out.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok || len != out.size()) {
        throw std::runtime_error("sha256 failed");
    }
    return out;
}

}  // namespace autoserve::wire
