#pragma once

/// \file
/// \brief 256-bit hashes, the pluggable hash backend and hash helpers

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prt {

using word = std::uint64_t;
using bytes = std::vector<std::uint8_t>;

/// Fixed-width 32-byte digest (security parameter k = 256 bits).
using hash = std::array<std::uint8_t, 32>;

/// Hash backend: input bytes to a 32-byte digest.
using hash_backend = hash (*)(std::span<const std::uint8_t>);

/// Default backend (SHA-256).
hash sha256_backend(std::span<const std::uint8_t> data);

/// Installs a backend and returns the previous one. Not thread-safe; intended for benchmarks.
hash_backend set_hash_backend(hash_backend backend) noexcept;

/// Restores the previous backend on scope exit.
class scoped_hash_backend {
public:
    explicit scoped_hash_backend(hash_backend backend) noexcept : m_previous{set_hash_backend(backend)} {}
    ~scoped_hash_backend() { set_hash_backend(m_previous); }
    scoped_hash_backend(const scoped_hash_backend &) = delete;
    scoped_hash_backend &operator=(const scoped_hash_backend &) = delete;

private:
    hash_backend m_previous;
};

hash hash_bytes(std::span<const std::uint8_t> data);

/// hash(left || right)
hash hash_pair(const hash &left, const hash &right);

/// Leaf hash of a machine word: hash of its 8-byte little-endian encoding.
hash hash_word(word w);

std::string to_hex(const hash &h);
std::string to_hex(std::span<const std::uint8_t> data);
std::optional<hash> hash_from_hex(std::string_view text);
std::optional<bytes> bytes_from_hex(std::string_view text);

/// Short prefix used in human-readable output.
std::string short_hex(const hash &h);

} // namespace prt
