#include "prt/steplog.hpp"

#include "prt/effort.hpp"
#include "prt/wire.hpp"

namespace prt {

namespace {

class record_access {
public:
    record_access(machine_state &state, merkle_tree &tree, access_log &log) noexcept :
        m_state{state},
        m_tree{tree},
        m_log{log} {}

    word read(std::uint64_t address) {
        const word value = m_state[address];
        m_log.entries.push_back({access_type::read, address, value, m_tree.proof(address).siblings, std::nullopt});
        return value;
    }

    word fetch(std::uint64_t address) {
        return read(address);
    }

    void write(std::uint64_t address, word value) {
        m_log.entries.push_back({access_type::write, address, m_state[address], m_tree.proof(address).siblings, value});
        m_state[address] = value;
        m_tree.set_leaf(address, hash_word(value));
    }

private:
    machine_state &m_state;
    merkle_tree &m_tree;
    access_log &m_log;
};

struct replay_rejected {
    reject_reason reason;
};

class replay_access {
public:
    replay_access(const hash &root, const access_log &log, unsigned depth) noexcept :
        m_root{root},
        m_log{log},
        m_depth{depth} {}

    word read(std::uint64_t address) {
        const auto &e = next(access_type::read, address);
        return e.prior;
    }

    word fetch(std::uint64_t address) {
        return read(address);
    }

    void write(std::uint64_t address, word value) {
        const auto &e = next(access_type::write, address);
        m_root = up(e.address, e.siblings, hash_word(value));
    }

    bool exhausted() const noexcept {
        return m_next == m_log.entries.size();
    }

    const hash &root() const noexcept {
        return m_root;
    }

private:
    hash m_root;
    const access_log &m_log;
    unsigned m_depth;
    std::size_t m_next = 0;

    const access_entry &next(access_type type, std::uint64_t address) {
        if (m_next >= m_log.entries.size()) {
            throw replay_rejected{reject_reason::length_mismatch};
        }
        const auto &e = m_log.entries[m_next++];
        if (e.type != type) {
            throw replay_rejected{reject_reason::type_mismatch};
        }
        if (e.address != address) {
            throw replay_rejected{reject_reason::address_mismatch};
        }
        if (e.siblings.size() != m_depth || up(e.address, e.siblings, hash_word(e.prior)) != m_root) {
            throw replay_rejected{reject_reason::proof_mismatch};
        }
        return e;
    }
};

} // namespace

const char *to_string(reject_reason reason) noexcept {
    switch (reason) {
        case reject_reason::none:
            return "NONE";
        case reject_reason::type_mismatch:
            return "TYPE_MISMATCH";
        case reject_reason::address_mismatch:
            return "ADDRESS_MISMATCH";
        case reject_reason::proof_mismatch:
            return "PROOF_MISMATCH";
        case reject_reason::length_mismatch:
            return "LENGTH_MISMATCH";
    }
    return "UNKNOWN";
}

access_log step_with_log(machine_state &state, merkle_tree &tree) {
    detail::count_step();
    access_log log;
    record_access access{state, tree, log};
    execute_step(access, state.address_mask());
    return log;
}

std::pair<machine_state, access_log> step_with_log(const machine_state &state, const merkle_tree &tree) {
    machine_state next = state;
    merkle_tree working = tree;
    auto log = step_with_log(next, working);
    return {std::move(next), std::move(log)};
}

step_hash_result step_hash(const hash &m, const access_log &log) {
    // The state size is implied by the proof depth of the first access (the
    // PC read); a forged depth would require a hash collision to verify.
    if (log.entries.empty()) {
        return {std::nullopt, reject_reason::length_mismatch};
    }
    const auto depth = static_cast<unsigned>(log.entries.front().siblings.size());
    if (depth < min_log2_words || depth > max_log2_words) {
        return {std::nullopt, reject_reason::proof_mismatch};
    }
    const std::uint64_t mask = (std::uint64_t{1} << depth) - 1;
    replay_access access{m, log, depth};
    try {
        execute_step(access, mask);
    } catch (const replay_rejected &r) {
        return {std::nullopt, r.reason};
    }
    if (!access.exhausted()) {
        return {std::nullopt, reject_reason::length_mismatch};
    }
    return {access.root(), reject_reason::none};
}

void encode_log(const access_log &log, bytes &out) {
    put_u8(out, static_cast<std::uint8_t>(log.entries.size()));
    for (const auto &e : log.entries) {
        put_u8(out, static_cast<std::uint8_t>(e.type));
        put_u64(out, e.address);
        put_u64(out, e.prior);
        encode_path(sibling_path{e.address, e.siblings}, out);
    }
}

bytes encode_log(const access_log &log) {
    bytes out;
    encode_log(log, out);
    return out;
}

std::optional<access_log> decode_log(std::span<const std::uint8_t> data, std::size_t &offset) {
    std::uint8_t count = 0;
    if (!get_u8(data, offset, count)) {
        return std::nullopt;
    }
    access_log log;
    log.entries.resize(count);
    for (auto &e : log.entries) {
        std::uint8_t type = 0;
        if (!get_u8(data, offset, type) || type > 1 || !get_u64(data, offset, e.address) ||
            !get_u64(data, offset, e.prior)) {
            return std::nullopt;
        }
        e.type = static_cast<access_type>(type);
        auto path = decode_path(data, offset);
        if (!path || path->address != e.address) {
            return std::nullopt;
        }
        e.siblings = std::move(path->siblings);
    }
    return log;
}

std::optional<access_log> decode_log(std::span<const std::uint8_t> data) {
    std::size_t offset = 0;
    auto log = decode_log(data, offset);
    if (!log || offset != data.size()) {
        return std::nullopt;
    }
    return log;
}

} // namespace prt
