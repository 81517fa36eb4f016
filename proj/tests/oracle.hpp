#pragma once

// Reference implementations used as test oracles. They share no code with
// the library: the interpreter decodes instruction bits itself and the tree
// builder calls OpenSSL directly.

#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

namespace oracle {

using digest = std::array<std::uint8_t, 32>;

inline digest sha(const std::uint8_t *data, std::size_t len) {
    digest d;
    SHA256(data, len, d.data());
    return d;
}

inline digest leaf(std::uint64_t w) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<std::uint8_t>(w >> (8 * i));
    }
    return sha(b, 8);
}

inline digest join(const digest &l, const digest &r) {
    std::uint8_t b[64];
    std::memcpy(b, l.data(), 32);
    std::memcpy(b + 32, r.data(), 32);
    return sha(b, 64);
}

// Recursive root over a power-of-two range of leaf labels.
inline digest root_of(const std::vector<digest> &labels, std::size_t lo, std::size_t n) {
    if (n == 1) {
        return labels[lo];
    }
    return join(root_of(labels, lo, n / 2), root_of(labels, lo + n / 2, n / 2));
}

inline digest root_of(const std::vector<digest> &labels) {
    return root_of(labels, 0, labels.size());
}

// Label of node (level, index), level 0 being the root.
inline digest node_of(const std::vector<digest> &labels, unsigned level, std::size_t index) {
    std::size_t width = labels.size() >> level;
    return root_of(labels, index * width, width);
}

inline digest words_root(const std::vector<std::uint64_t> &mem) {
    std::vector<digest> labels;
    for (auto w : mem) {
        labels.push_back(leaf(w));
    }
    return root_of(labels);
}

// Straight-line interpreter over the toy ISA.
struct interpreter {
    std::vector<std::uint64_t> mem;

    std::uint64_t &at(std::uint64_t a) {
        return mem[a % mem.size()];
    }

    bool halted() {
        std::uint64_t insn = at(at(0));
        unsigned op = insn & 0xff;
        return op == 0 || op > 7;
    }

    void step() {
        std::uint64_t pc = at(0);
        std::uint64_t insn = at(pc);
        unsigned op = insn & 0xff;
        unsigned rd = (insn >> 8) & 7;
        unsigned rs = (insn >> 16) & 7;
        std::int64_t imm = static_cast<std::int32_t>(static_cast<std::uint32_t>(insn >> 32));
        std::uint64_t uimm = static_cast<std::uint32_t>(insn >> 32);
        std::uint64_t &d = at(1 + rd);
        std::uint64_t s = at(1 + rs);
        switch (op) {
            case 1:
                d = static_cast<std::uint64_t>(imm);
                break;
            case 2:
                d = d + s;
                break;
            case 3:
                d = d - s;
                break;
            case 4:
                d = at(d + static_cast<std::uint64_t>(imm));
                break;
            case 5:
                at(uimm) = s;
                break;
            case 6:
                at(0) = uimm;
                return;
            case 7:
                at(0) = s != 0 ? uimm : pc + 1;
                return;
            default:
                return;
        }
        at(0) = pc + 1;
    }
};

} // namespace oracle
