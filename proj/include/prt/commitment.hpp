#pragma once

/// \file
/// \brief Computation hashes: Merkle trees over sampled state hashes of a run
///
/// A commitment covers the closed step interval [start, start + span] at a
/// stride of 2^g steps. It samples the n + 1 state hashes at
/// start + i 2^g (i = 0..n, n = span / 2^g) and pads the leaves to 2n by
/// repeating the endpoint, so leaf 0 is the state at the interval start,
/// leaf n the state at its end, and the leaf count is a power of two. A
/// stride of 2^0 gives a dense commitment. Once a machine halts its state
/// hash simply repeats.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "prt/machine.hpp"
#include "prt/merkle.hpp"

namespace prt {

/// Stride exponents g_1 > g_2 > ... > g_b = 0 over a budget of t steps.
struct stage_config {
    std::vector<unsigned> strides;
    std::uint64_t max_steps = 0;

    /// Throws std::invalid_argument when the configuration is unusable.
    void validate() const;

    std::size_t stages() const noexcept {
        return strides.size();
    }

    /// Span covered by a stage-i commitment (stage index is zero-based).
    std::uint64_t span_of(std::size_t stage) const noexcept {
        return stage == 0 ? max_steps : std::uint64_t{1} << strides[stage - 1];
    }

    static stage_config dense(std::uint64_t max_steps) {
        return {{0}, max_steps};
    }
};

/// Leaf value with its sibling path to the commitment root.
struct proof_bundle {
    std::uint64_t index = 0;
    hash leaf{};
    std::vector<hash> siblings;

    bool verifies(const hash &root) const;

    bool operator==(const proof_bundle &) const = default;
};

class commitment {
public:
    /// `points` holds the n + 1 sampled state hashes.
    commitment(std::uint64_t start, std::uint64_t span, unsigned stride_log2, std::span<const hash> points);

    std::uint64_t start() const noexcept {
        return m_start;
    }
    std::uint64_t span() const noexcept {
        return m_span;
    }
    unsigned stride_log2() const noexcept {
        return m_stride_log2;
    }
    /// n: number of strides in the interval; also the index of the endpoint leaf.
    std::uint64_t intervals() const noexcept {
        return m_span >> m_stride_log2;
    }
    std::uint64_t end_index() const noexcept {
        return intervals();
    }
    std::uint64_t leaf_count() const noexcept {
        return m_tree.leaf_count();
    }
    unsigned depth() const noexcept {
        return m_tree.depth();
    }
    const hash &root() const noexcept {
        return m_tree.root();
    }
    const merkle_tree &tree() const noexcept {
        return m_tree;
    }

    const hash &leaf(std::uint64_t index) const {
        return m_tree.leaf(index);
    }

    /// Step whose state hash labels leaf `index` (padding leaves map to the endpoint).
    std::uint64_t step_of_leaf(std::uint64_t index) const noexcept;

    proof_bundle leaf_with_proof(std::uint64_t index) const;
    proof_bundle initial_leaf_proof() const {
        return leaf_with_proof(0);
    }
    proof_bundle final_leaf_proof() const {
        return leaf_with_proof(end_index());
    }

    std::pair<hash, hash> children(unsigned level, std::uint64_t index) const {
        return m_tree.children(level, index);
    }

private:
    std::uint64_t m_start;
    std::uint64_t m_span;
    unsigned m_stride_log2;
    merkle_tree m_tree;
};

/// Pads sampled points to the commitment leaf layout.
std::vector<hash> commitment_leaves(std::span<const hash> points);

/// Runs `initial` (the state at step `start`) forward over `span` steps,
/// state-hashing every 2^g steps; returns the n + 1 sampled hashes.
std::vector<hash> sample_state_hashes(machine_state initial, std::uint64_t span, unsigned stride_log2);

commitment build_commitment(const machine_state &initial, std::uint64_t start, std::uint64_t span, unsigned stride_log2);

/// Commitment announcement: start (8) || span (8) || g (1) || root (32) || leaf-0 bundle.
struct announcement {
    std::uint64_t start = 0;
    std::uint64_t span = 0;
    unsigned stride_log2 = 0;
    hash root{};
    proof_bundle first;

    bool operator==(const announcement &) const = default;
};

announcement announce(const commitment &c);

/// Bundle wire form: leaf (32) || path (address, depth, siblings).
void encode_bundle(const proof_bundle &b, bytes &out);
std::optional<proof_bundle> decode_bundle(std::span<const std::uint8_t> data, std::size_t &offset);

void encode_announcement(const announcement &a, bytes &out);
std::optional<announcement> decode_announcement(std::span<const std::uint8_t> data, std::size_t &offset);

} // namespace prt
