#include "prt/merkle.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "prt/effort.hpp"
#include "prt/wire.hpp"

namespace prt {

hash up(std::uint64_t address, std::span<const hash> siblings, hash h) {
    for (const auto &q : siblings) {
        h = (address & 1) == 0 ? hash_pair(h, q) : hash_pair(q, h);
        address >>= 1;
    }
    return h;
}

bool verify_word(const hash &root, std::uint64_t address, word w, const sibling_path &path) {
    if (path.address != address) {
        return false;
    }
    if (path.depth() < 64 && (address >> path.depth()) != 0) {
        return false;
    }
    return up(address, path.siblings, hash_word(w)) == root;
}

merkle_tree::merkle_tree(std::vector<hash> leaves) {
    if (leaves.empty() || !std::has_single_bit(leaves.size())) {
        throw std::invalid_argument{"merkle tree needs a power-of-two number of leaves"};
    }
    m_depth = static_cast<unsigned>(std::countr_zero(leaves.size()));
    const std::size_t n = leaves.size();
    m_nodes.resize(2 * n);
    std::copy(leaves.begin(), leaves.end(), m_nodes.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = n - 1; i >= 1; --i) {
        m_nodes[i] = hash_pair(m_nodes[2 * i], m_nodes[2 * i + 1]);
    }
}

const hash &merkle_tree::node(unsigned level, std::uint64_t index) const {
    if (level > m_depth || index >= (std::uint64_t{1} << level)) {
        throw std::out_of_range{"merkle node out of range"};
    }
    return m_nodes[(std::uint64_t{1} << level) + index];
}

sibling_path merkle_tree::proof(std::uint64_t index) const {
    if (index >= leaf_count()) {
        throw std::out_of_range{"leaf index out of range"};
    }
    sibling_path path{.address = index, .siblings = {}};
    path.siblings.reserve(m_depth);
    for (std::uint64_t i = leaf_count() + index; i > 1; i >>= 1) {
        path.siblings.push_back(m_nodes[i ^ 1]);
    }
    return path;
}

std::pair<hash, hash> merkle_tree::children(unsigned level, std::uint64_t index) const {
    if (level >= m_depth || index >= (std::uint64_t{1} << level)) {
        throw std::out_of_range{"node has no children"};
    }
    const auto i = (std::uint64_t{1} << level) + index;
    return {m_nodes[2 * i], m_nodes[2 * i + 1]};
}

std::pair<hash, hash> merkle_tree::node_children(std::string_view path) const {
    std::uint64_t index = 0;
    for (char c : path) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument{"node path must be a bit string"};
        }
        index = 2 * index + static_cast<std::uint64_t>(c - '0');
    }
    return children(static_cast<unsigned>(path.size()), index);
}

void merkle_tree::set_leaf(std::uint64_t index, const hash &label) {
    if (index >= leaf_count()) {
        throw std::out_of_range{"leaf index out of range"};
    }
    auto i = leaf_count() + index;
    m_nodes[i] = label;
    for (i >>= 1; i >= 1; i >>= 1) {
        m_nodes[i] = hash_pair(m_nodes[2 * i], m_nodes[2 * i + 1]);
    }
}

merkle_tree state_tree(const machine_state &state) {
    detail::count_state_hash();
    const auto words = state.words();
    std::vector<hash> leaves(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        leaves[i] = hash_word(words[i]);
    }
    return merkle_tree{std::move(leaves)};
}

hash state_hash(const machine_state &state) {
    detail::count_state_hash();
    const auto words = state.words();
    std::vector<hash> level(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        level[i] = hash_word(words[i]);
    }
    for (auto n = level.size(); n > 1; n /= 2) {
        for (std::size_t i = 0; i < n / 2; ++i) {
            level[i] = hash_pair(level[2 * i], level[2 * i + 1]);
        }
    }
    return level.front();
}

merkle_tree update_path(merkle_tree tree, std::uint64_t address, word w) {
    tree.set_leaf(address, hash_word(w));
    return tree;
}

sibling_path word_proof(const merkle_tree &tree, std::uint64_t address) {
    return tree.proof(address);
}

void encode_path(const sibling_path &path, bytes &out) {
    put_u64(out, path.address);
    out.push_back(static_cast<std::uint8_t>(path.siblings.size()));
    for (const auto &s : path.siblings) {
        put_hash(out, s);
    }
}

std::optional<sibling_path> decode_path(std::span<const std::uint8_t> data, std::size_t &offset) {
    sibling_path path;
    std::uint8_t depth = 0;
    if (!get_u64(data, offset, path.address) || !get_u8(data, offset, depth)) {
        return std::nullopt;
    }
    path.siblings.resize(depth);
    for (auto &s : path.siblings) {
        if (!get_hash(data, offset, s)) {
            return std::nullopt;
        }
    }
    return path;
}

} // namespace prt
