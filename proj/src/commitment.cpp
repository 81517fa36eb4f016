#include "prt/commitment.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

#include "prt/effort.hpp"
#include "prt/wire.hpp"

namespace prt {

void stage_config::validate() const {
    if (strides.empty()) {
        throw std::invalid_argument{"stage configuration needs at least one stage"};
    }
    if (strides.back() != 0) {
        throw std::invalid_argument{"last stage must be dense (stride exponent 0)"};
    }
    for (std::size_t i = 1; i < strides.size(); ++i) {
        if (strides[i] >= strides[i - 1]) {
            throw std::invalid_argument{"stride exponents must be strictly decreasing"};
        }
    }
    if (max_steps == 0 || !std::has_single_bit(max_steps)) {
        throw std::invalid_argument{"step budget must be a power of two"};
    }
    if (strides.front() >= 64 || (max_steps >> strides.front()) == 0) {
        throw std::invalid_argument{"stage-1 stride 2^" + std::to_string(strides.front()) + " exceeds the step budget"};
    }
}

bool proof_bundle::verifies(const hash &root) const {
    if (siblings.size() < 64 && (index >> siblings.size()) != 0) {
        return false;
    }
    return up(index, siblings, leaf) == root;
}

std::vector<hash> commitment_leaves(std::span<const hash> points) {
    if (points.size() < 2 || !std::has_single_bit(points.size() - 1)) {
        throw std::invalid_argument{"commitment needs 2^k + 1 sampled points"};
    }
    const auto n = points.size() - 1;
    std::vector<hash> leaves(2 * n, points.back());
    std::copy(points.begin(), points.end(), leaves.begin());
    return leaves;
}

commitment::commitment(std::uint64_t start, std::uint64_t span, unsigned stride_log2, std::span<const hash> points) :
    m_start{start},
    m_span{span},
    m_stride_log2{stride_log2},
    m_tree{commitment_leaves(points)} {
    if (stride_log2 >= 64 || (span >> stride_log2) == 0 || (span >> stride_log2) + 1 != points.size() ||
        (span & ((std::uint64_t{1} << stride_log2) - 1)) != 0) {
        throw std::invalid_argument{"sampled points do not match the commitment interval"};
    }
}

std::uint64_t commitment::step_of_leaf(std::uint64_t index) const noexcept {
    return m_start + (std::min(index, end_index()) << m_stride_log2);
}

proof_bundle commitment::leaf_with_proof(std::uint64_t index) const {
    if (index >= leaf_count()) {
        throw std::out_of_range{"commitment leaf index out of range"};
    }
    return {index, m_tree.leaf(index), m_tree.proof(index).siblings};
}

std::vector<hash> sample_state_hashes(machine_state state, std::uint64_t span, unsigned stride_log2) {
    const commitment_build_scope building;
    const std::uint64_t stride = std::uint64_t{1} << stride_log2;
    const std::uint64_t n = span >> stride_log2;
    std::vector<hash> points;
    points.reserve(n + 1);
    points.push_back(state_hash(state));
    for (std::uint64_t i = 0; i < n; ++i) {
        if (is_halted(state)) {
            // Fixed point: the remaining samples repeat.
            points.resize(n + 1, points.back());
            break;
        }
        advance(state, stride);
        points.push_back(state_hash(state));
    }
    return points;
}

commitment build_commitment(const machine_state &initial, std::uint64_t start, std::uint64_t span, unsigned stride_log2) {
    if (stride_log2 >= 64 || (span >> stride_log2) == 0 || !std::has_single_bit(span >> stride_log2)) {
        throw std::invalid_argument{"commitment span must be a power-of-two multiple of the stride"};
    }
    auto points = sample_state_hashes(initial, span, stride_log2);
    const commitment_build_scope building;
    return commitment{start, span, stride_log2, points};
}

announcement announce(const commitment &c) {
    return {c.start(), c.span(), c.stride_log2(), c.root(), c.initial_leaf_proof()};
}

void encode_bundle(const proof_bundle &b, bytes &out) {
    put_hash(out, b.leaf);
    encode_path(sibling_path{b.index, b.siblings}, out);
}

std::optional<proof_bundle> decode_bundle(std::span<const std::uint8_t> data, std::size_t &offset) {
    proof_bundle b;
    if (!get_hash(data, offset, b.leaf)) {
        return std::nullopt;
    }
    auto path = decode_path(data, offset);
    if (!path) {
        return std::nullopt;
    }
    b.index = path->address;
    b.siblings = std::move(path->siblings);
    return b;
}

void encode_announcement(const announcement &a, bytes &out) {
    put_u64(out, a.start);
    put_u64(out, a.span);
    put_u8(out, static_cast<std::uint8_t>(a.stride_log2));
    put_hash(out, a.root);
    encode_bundle(a.first, out);
}

std::optional<announcement> decode_announcement(std::span<const std::uint8_t> data, std::size_t &offset) {
    announcement a;
    std::uint8_t g = 0;
    if (!get_u64(data, offset, a.start) || !get_u64(data, offset, a.span) || !get_u8(data, offset, g) ||
        !get_hash(data, offset, a.root)) {
        return std::nullopt;
    }
    a.stride_log2 = g;
    auto first = decode_bundle(data, offset);
    if (!first) {
        return std::nullopt;
    }
    a.first = std::move(*first);
    return a;
}

} // namespace prt
