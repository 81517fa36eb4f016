#include "prt/wire.hpp"

#include <cstring>
#include <stdexcept>

namespace prt {

namespace {

template <typename T>
void put_be(bytes &out, T v) {
    for (int i = static_cast<int>(sizeof(T)) - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

template <typename T>
bool get_be(std::span<const std::uint8_t> in, std::size_t &offset, T &v) {
    if (offset > in.size() || in.size() - offset < sizeof(T)) {
        return false;
    }
    T r = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        r = static_cast<T>((r << 8) | in[offset + i]);
    }
    v = r;
    offset += sizeof(T);
    return true;
}

} // namespace

void put_u8(bytes &out, std::uint8_t v) {
    out.push_back(v);
}

void put_u16(bytes &out, std::uint16_t v) {
    put_be(out, v);
}

void put_u32(bytes &out, std::uint32_t v) {
    put_be(out, v);
}

void put_u64(bytes &out, std::uint64_t v) {
    put_be(out, v);
}

void put_hash(bytes &out, const hash &h) {
    out.insert(out.end(), h.begin(), h.end());
}

void put_string(bytes &out, const std::string &s) {
    if (s.size() > UINT16_MAX) {
        throw std::invalid_argument{"string too long for the wire"};
    }
    put_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

bool get_u8(std::span<const std::uint8_t> in, std::size_t &offset, std::uint8_t &v) {
    return get_be(in, offset, v);
}

bool get_u16(std::span<const std::uint8_t> in, std::size_t &offset, std::uint16_t &v) {
    return get_be(in, offset, v);
}

bool get_u32(std::span<const std::uint8_t> in, std::size_t &offset, std::uint32_t &v) {
    return get_be(in, offset, v);
}

bool get_u64(std::span<const std::uint8_t> in, std::size_t &offset, std::uint64_t &v) {
    return get_be(in, offset, v);
}

bool get_hash(std::span<const std::uint8_t> in, std::size_t &offset, hash &h) {
    if (offset > in.size() || in.size() - offset < h.size()) {
        return false;
    }
    std::memcpy(h.data(), in.data() + offset, h.size());
    offset += h.size();
    return true;
}

bool get_string(std::span<const std::uint8_t> in, std::size_t &offset, std::string &s) {
    std::uint16_t len = 0;
    if (!get_u16(in, offset, len) || in.size() - offset < len) {
        return false;
    }
    s.assign(reinterpret_cast<const char *>(in.data() + offset), len);
    offset += len;
    return true;
}

bytes encode_frame(const frame &f) {
    if (f.body.size() + 1 > max_frame_size) {
        throw std::invalid_argument{"frame too large"};
    }
    bytes out;
    out.reserve(5 + f.body.size());
    put_u32(out, static_cast<std::uint32_t>(f.body.size() + 1));
    out.push_back(f.tag);
    out.insert(out.end(), f.body.begin(), f.body.end());
    return out;
}

std::optional<std::pair<frame, std::size_t>> decode_frame(std::span<const std::uint8_t> in) {
    std::size_t offset = 0;
    std::uint32_t len = 0;
    if (!get_u32(in, offset, len)) {
        return std::nullopt;
    }
    if (len == 0 || len > max_frame_size) {
        throw std::runtime_error{"invalid frame length " + std::to_string(len)};
    }
    if (in.size() - offset < len) {
        return std::nullopt;
    }
    frame f;
    f.tag = in[offset];
    f.body.assign(in.begin() + static_cast<std::ptrdiff_t>(offset + 1), in.begin() + static_cast<std::ptrdiff_t>(offset + len));
    return std::make_pair(std::move(f), offset + len);
}

} // namespace prt
