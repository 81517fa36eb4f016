#pragma once

/// \file
/// \brief Referee/party messages and their frame bodies
///
/// Every query and reply body starts with a 4-byte sequence number; a reply
/// echoes the sequence number of the query it answers. COMMIT is used in both
/// directions with different bodies.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prt/commitment.hpp"
#include "prt/steplog.hpp"
#include "prt/wire.hpp"

namespace prt {

enum class message_tag : std::uint8_t {
    register_party = 1,
    commit = 2,
    query_children = 3,
    reveal_children = 4,
    query_leaf = 5,
    reveal_leaf = 6,
    query_log = 7,
    reveal_log = 8,
    verdict = 9,
    query_hash = 10,
    reveal_hash = 11,
};

const char *to_string(message_tag tag) noexcept;

struct register_message {
    std::string name;
    std::string strategy;
};

struct commit_request {
    std::uint32_t seq = 0;
    std::uint8_t stage = 0;
    std::uint64_t start = 0;
    std::uint64_t span = 0;
    std::uint8_t stride_log2 = 0;
};

struct commit_reply {
    std::uint32_t seq = 0;
    announcement posted;
    /// Endpoint leaf (index n) with its proof: the party's claim for the interval end.
    proof_bundle last;
};

struct children_query {
    std::uint32_t seq = 0;
    std::uint8_t stage = 0;
    std::uint64_t start = 0;
    std::uint8_t level = 0;
    std::uint64_t index = 0;
};

struct children_reveal {
    std::uint32_t seq = 0;
    hash left{};
    hash right{};
};

struct leaf_query {
    std::uint32_t seq = 0;
    std::uint8_t stage = 0;
    std::uint64_t start = 0;
    std::uint64_t index = 0;
};

struct leaf_reveal {
    std::uint32_t seq = 0;
    proof_bundle bundle;
};

struct log_query {
    std::uint32_t seq = 0;
    std::uint64_t step = 0;
};

struct log_reveal {
    std::uint32_t seq = 0;
    access_log log;
};

struct hash_query {
    std::uint32_t seq = 0;
    std::uint64_t step = 0;
};

struct hash_reveal {
    std::uint32_t seq = 0;
    hash value{};
};

struct verdict_message {
    std::string outcome;
    hash final_hash{};
    std::vector<std::string> winners;
};

frame encode(const register_message &m);
frame encode(const commit_request &m);
frame encode(const commit_reply &m);
frame encode(const children_query &m);
frame encode(const children_reveal &m);
frame encode(const leaf_query &m);
frame encode(const leaf_reveal &m);
frame encode(const log_query &m);
frame encode(const log_reveal &m);
frame encode(const hash_query &m);
frame encode(const hash_reveal &m);
frame encode(const verdict_message &m);

// Decoders return nullopt on a wrong tag, short body or trailing bytes.
std::optional<register_message> decode_register(const frame &f);
std::optional<commit_request> decode_commit_request(const frame &f);
std::optional<commit_reply> decode_commit_reply(const frame &f);
std::optional<children_query> decode_children_query(const frame &f);
std::optional<children_reveal> decode_children_reveal(const frame &f);
std::optional<leaf_query> decode_leaf_query(const frame &f);
std::optional<leaf_reveal> decode_leaf_reveal(const frame &f);
std::optional<log_query> decode_log_query(const frame &f);
std::optional<log_reveal> decode_log_reveal(const frame &f);
std::optional<hash_query> decode_hash_query(const frame &f);
std::optional<hash_reveal> decode_hash_reveal(const frame &f);
std::optional<verdict_message> decode_verdict(const frame &f);

/// Sequence number of a query or reply frame, if it has one.
std::optional<std::uint32_t> frame_seq(const frame &f);

} // namespace prt
