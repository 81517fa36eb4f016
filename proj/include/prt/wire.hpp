#pragma once

/// \file
/// \brief Fixed-width big-endian encoding helpers and length-prefixed frames
///
/// Frame layout: length (4 bytes BE, counts tag and body) || tag (1 byte) || body.

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "prt/hash.hpp"

namespace prt {

inline constexpr std::size_t max_frame_size = 1U << 24;

void put_u8(bytes &out, std::uint8_t v);
void put_u16(bytes &out, std::uint16_t v);
void put_u32(bytes &out, std::uint32_t v);
void put_u64(bytes &out, std::uint64_t v);
void put_hash(bytes &out, const hash &h);
void put_string(bytes &out, const std::string &s);

bool get_u8(std::span<const std::uint8_t> in, std::size_t &offset, std::uint8_t &v);
bool get_u16(std::span<const std::uint8_t> in, std::size_t &offset, std::uint16_t &v);
bool get_u32(std::span<const std::uint8_t> in, std::size_t &offset, std::uint32_t &v);
bool get_u64(std::span<const std::uint8_t> in, std::size_t &offset, std::uint64_t &v);
bool get_hash(std::span<const std::uint8_t> in, std::size_t &offset, hash &h);
bool get_string(std::span<const std::uint8_t> in, std::size_t &offset, std::string &s);

struct frame {
    std::uint8_t tag = 0;
    bytes body;

    bool operator==(const frame &) const = default;
};

bytes encode_frame(const frame &f);

/// Decodes one frame from the front of `in`. Returns the frame and the number
/// of bytes consumed, or nullopt when more input is needed. Throws
/// std::runtime_error on an impossible length.
std::optional<std::pair<frame, std::size_t>> decode_frame(std::span<const std::uint8_t> in);

} // namespace prt
