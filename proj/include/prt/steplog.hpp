#pragma once

/// \file
/// \brief Access logs and the hash-only step function
///
/// step_with_log executes one instruction and records every state access with
/// a sibling path taken against the root as it stands before that access.
/// step_hash runs the same instruction logic against a log instead of a
/// state, authenticating each access and folding writes into the root.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prt/machine.hpp"
#include "prt/merkle.hpp"

namespace prt {

enum class access_type : std::uint8_t { read = 0, write = 1 };

struct access_entry {
    access_type type = access_type::read;
    std::uint64_t address = 0;
    /// Word value at `address` before the access.
    word prior = 0;
    /// Siblings leaf-to-root against the root before this access.
    std::vector<hash> siblings;
    /// Value written; informational only, replay recomputes it.
    std::optional<word> written;

    bool operator==(const access_entry &) const = default;
};

struct access_log {
    std::vector<access_entry> entries;

    bool operator==(const access_log &) const = default;
};

enum class reject_reason : std::uint8_t {
    none = 0,
    type_mismatch,
    address_mismatch,
    proof_mismatch,
    length_mismatch,
};

const char *to_string(reject_reason reason) noexcept;

struct step_hash_result {
    std::optional<hash> root;
    reject_reason reason = reject_reason::none;

    bool accepted() const noexcept {
        return root.has_value();
    }
};

/// Steps `state` and returns the log; `tree` must be the state tree of `state`
/// and is updated to the tree of the new state.
access_log step_with_log(machine_state &state, merkle_tree &tree);

/// Pure form: returns the next state and the log.
std::pair<machine_state, access_log> step_with_log(const machine_state &state, const merkle_tree &tree);

/// Replays a log from state hash `m`; either the next state hash or a rejection.
step_hash_result step_hash(const hash &m, const access_log &log);

/// Wire form: count (1 byte), then per entry type (1) || address (8 BE) || prior (8 BE) || path.
bytes encode_log(const access_log &log);
void encode_log(const access_log &log, bytes &out);
std::optional<access_log> decode_log(std::span<const std::uint8_t> data);
std::optional<access_log> decode_log(std::span<const std::uint8_t> data, std::size_t &offset);

} // namespace prt
