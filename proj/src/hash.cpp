#include "prt/hash.hpp"

#include <cstring>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "prt/effort.hpp"

namespace prt {

namespace {

struct md_ctx_deleter {
    void operator()(EVP_MD_CTX *ctx) const noexcept {
        EVP_MD_CTX_free(ctx);
    }
};

struct md_deleter {
    void operator()(EVP_MD *md) const noexcept {
        EVP_MD_free(md);
    }
};

// Fetching the digest once and reusing a context avoids most of the EVP overhead.
struct sha256_engine {
    std::unique_ptr<EVP_MD, md_deleter> md{EVP_MD_fetch(nullptr, "SHA256", nullptr)};
    std::unique_ptr<EVP_MD_CTX, md_ctx_deleter> ctx{EVP_MD_CTX_new()};

    sha256_engine() {
        if (!md || !ctx) {
            throw std::runtime_error{"unable to initialize SHA-256"};
        }
    }
};

hash_backend g_backend = &sha256_backend;

constexpr char hex_digits[] = "0123456789abcdef";

int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    return -1;
}

} // namespace

hash sha256_backend(std::span<const std::uint8_t> data) {
    thread_local sha256_engine engine;
    hash out{};
    unsigned int len = 0;
    if (EVP_DigestInit_ex(engine.ctx.get(), engine.md.get(), nullptr) != 1 ||
        EVP_DigestUpdate(engine.ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(engine.ctx.get(), out.data(), &len) != 1 || len != out.size()) {
        throw std::runtime_error{"SHA-256 evaluation failed"};
    }
    return out;
}

hash_backend set_hash_backend(hash_backend backend) noexcept {
    auto previous = g_backend;
    g_backend = backend ? backend : &sha256_backend;
    return previous;
}

hash hash_bytes(std::span<const std::uint8_t> data) {
    detail::count_hash();
    return g_backend(data);
}

hash hash_pair(const hash &left, const hash &right) {
    std::array<std::uint8_t, 64> buffer{};
    std::memcpy(buffer.data(), left.data(), left.size());
    std::memcpy(buffer.data() + left.size(), right.data(), right.size());
    return hash_bytes(buffer);
}

hash hash_word(word w) {
    std::array<std::uint8_t, 8> buffer{};
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        buffer[i] = static_cast<std::uint8_t>(w >> (8 * i));
    }
    return hash_bytes(buffer);
}

std::string to_hex(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(hex_digits[b >> 4]);
        out.push_back(hex_digits[b & 0xf]);
    }
    return out;
}

std::string to_hex(const hash &h) {
    return to_hex(std::span<const std::uint8_t>{h});
}

std::string short_hex(const hash &h) {
    return to_hex(std::span<const std::uint8_t>{h.data(), 6});
}

std::optional<bytes> bytes_from_hex(std::string_view text) {
    if (text.size() % 2 != 0) {
        return std::nullopt;
    }
    bytes out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(text[2 * i]);
        const int lo = hex_value(text[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            return std::nullopt;
        }
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::optional<hash> hash_from_hex(std::string_view text) {
    auto raw = bytes_from_hex(text);
    if (!raw || raw->size() != hash{}.size()) {
        return std::nullopt;
    }
    hash h{};
    std::memcpy(h.data(), raw->data(), h.size());
    return h;
}

} // namespace prt
