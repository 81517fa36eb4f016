#pragma once

/// \file
/// \brief Binary Merkle trees, inclusion proofs and the `up` reconstruction
///
/// Levels are numbered from the root: level 0 holds the root and level d the
/// 2^d leaves, so node (level, index) has children (level + 1, 2 index) and
/// (level + 1, 2 index + 1).

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "prt/hash.hpp"
#include "prt/machine.hpp"

namespace prt {

/// Sibling hashes on the path from a leaf to the root, ordered leaf-to-root.
struct sibling_path {
    std::uint64_t address = 0;
    std::vector<hash> siblings;

    unsigned depth() const noexcept {
        return static_cast<unsigned>(siblings.size());
    }

    bool operator==(const sibling_path &) const = default;
};

/// Rebuilds the root from a node label and its siblings; the parity of the
/// address at each level selects the side: even -> hash(h || q), odd -> hash(q || h).
hash up(std::uint64_t address, std::span<const hash> siblings, hash h);

/// Checks that word `w` sits at `address` in the state whose hash is `root`.
bool verify_word(const hash &root, std::uint64_t address, word w, const sibling_path &path);

class merkle_tree {
public:
    /// Builds a tree over 2^d leaf labels. A single leaf is its own root.
    explicit merkle_tree(std::vector<hash> leaves);

    const hash &root() const noexcept {
        return m_nodes[1];
    }
    unsigned depth() const noexcept {
        return m_depth;
    }
    std::uint64_t leaf_count() const noexcept {
        return std::uint64_t{1} << m_depth;
    }

    const hash &node(unsigned level, std::uint64_t index) const;
    const hash &leaf(std::uint64_t index) const {
        return node(m_depth, index);
    }

    sibling_path proof(std::uint64_t index) const;

    /// Labels of the two children of an internal node.
    std::pair<hash, hash> children(unsigned level, std::uint64_t index) const;

    /// Children of the node reached from the root by following `path`
    /// ('0' = left, '1' = right).
    std::pair<hash, hash> node_children(std::string_view path) const;

    /// Replaces one leaf label and recomputes the d labels above it.
    void set_leaf(std::uint64_t index, const hash &label);

    bool operator==(const merkle_tree &) const = default;

private:
    unsigned m_depth = 0;
    std::vector<hash> m_nodes; // heap order, index 0 unused
};

/// Merkle tree over the words of a machine state (leaves are hash_word).
merkle_tree state_tree(const machine_state &state);

/// Root of the state tree, computed level by level.
hash state_hash(const machine_state &state);

/// Returns a copy of `tree` with word `a` replaced by `w`.
merkle_tree update_path(merkle_tree tree, std::uint64_t address, word w);

sibling_path word_proof(const merkle_tree &tree, std::uint64_t address);

/// Wire form: address (8 bytes BE) || depth (1 byte) || siblings leaf-to-root.
void encode_path(const sibling_path &path, bytes &out);
std::optional<sibling_path> decode_path(std::span<const std::uint8_t> data, std::size_t &offset);

} // namespace prt
