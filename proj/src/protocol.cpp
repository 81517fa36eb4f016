#include "prt/protocol.hpp"

namespace prt {

namespace {

frame make(message_tag tag, bytes body) {
    return {static_cast<std::uint8_t>(tag), std::move(body)};
}

// Runs `parse` over the body of `f` and requires it to consume every byte.
template <typename T, typename Parse>
std::optional<T> parse_body(const frame &f, message_tag tag, Parse parse) {
    if (f.tag != static_cast<std::uint8_t>(tag)) {
        return std::nullopt;
    }
    T m{};
    std::size_t off = 0;
    if (!parse(f.body, off, m) || off != f.body.size()) {
        return std::nullopt;
    }
    return m;
}

using body_view = std::span<const std::uint8_t>;

} // namespace

const char *to_string(message_tag tag) noexcept {
    switch (tag) {
        case message_tag::register_party:
            return "REGISTER";
        case message_tag::commit:
            return "COMMIT";
        case message_tag::query_children:
            return "QUERY_CHILDREN";
        case message_tag::reveal_children:
            return "REVEAL_CHILDREN";
        case message_tag::query_leaf:
            return "QUERY_LEAF";
        case message_tag::reveal_leaf:
            return "REVEAL_LEAF";
        case message_tag::query_log:
            return "QUERY_LOG";
        case message_tag::reveal_log:
            return "REVEAL_LOG";
        case message_tag::verdict:
            return "VERDICT";
        case message_tag::query_hash:
            return "QUERY_HASH";
        case message_tag::reveal_hash:
            return "REVEAL_HASH";
    }
    return "UNKNOWN";
}

frame encode(const register_message &m) {
    bytes b;
    put_string(b, m.name);
    put_string(b, m.strategy);
    return make(message_tag::register_party, std::move(b));
}

frame encode(const commit_request &m) {
    bytes b;
    put_u32(b, m.seq);
    put_u8(b, m.stage);
    put_u64(b, m.start);
    put_u64(b, m.span);
    put_u8(b, m.stride_log2);
    return make(message_tag::commit, std::move(b));
}

frame encode(const commit_reply &m) {
    bytes b;
    put_u32(b, m.seq);
    encode_announcement(m.posted, b);
    encode_bundle(m.last, b);
    return make(message_tag::commit, std::move(b));
}

frame encode(const children_query &m) {
    bytes b;
    put_u32(b, m.seq);
    put_u8(b, m.stage);
    put_u64(b, m.start);
    put_u8(b, m.level);
    put_u64(b, m.index);
    return make(message_tag::query_children, std::move(b));
}

frame encode(const children_reveal &m) {
    bytes b;
    put_u32(b, m.seq);
    put_hash(b, m.left);
    put_hash(b, m.right);
    return make(message_tag::reveal_children, std::move(b));
}

frame encode(const leaf_query &m) {
    bytes b;
    put_u32(b, m.seq);
    put_u8(b, m.stage);
    put_u64(b, m.start);
    put_u64(b, m.index);
    return make(message_tag::query_leaf, std::move(b));
}

frame encode(const leaf_reveal &m) {
    bytes b;
    put_u32(b, m.seq);
    encode_bundle(m.bundle, b);
    return make(message_tag::reveal_leaf, std::move(b));
}

frame encode(const log_query &m) {
    bytes b;
    put_u32(b, m.seq);
    put_u64(b, m.step);
    return make(message_tag::query_log, std::move(b));
}

frame encode(const log_reveal &m) {
    bytes b;
    put_u32(b, m.seq);
    encode_log(m.log, b);
    return make(message_tag::reveal_log, std::move(b));
}

frame encode(const hash_query &m) {
    bytes b;
    put_u32(b, m.seq);
    put_u64(b, m.step);
    return make(message_tag::query_hash, std::move(b));
}

frame encode(const hash_reveal &m) {
    bytes b;
    put_u32(b, m.seq);
    put_hash(b, m.value);
    return make(message_tag::reveal_hash, std::move(b));
}

frame encode(const verdict_message &m) {
    bytes b;
    put_string(b, m.outcome);
    put_hash(b, m.final_hash);
    put_u16(b, static_cast<std::uint16_t>(m.winners.size()));
    for (const auto &w : m.winners) {
        put_string(b, w);
    }
    return make(message_tag::verdict, std::move(b));
}

std::optional<register_message> decode_register(const frame &f) {
    return parse_body<register_message>(f, message_tag::register_party, [](body_view in, std::size_t &off, register_message &m) {
        return get_string(in, off, m.name) && get_string(in, off, m.strategy);
    });
}

std::optional<commit_request> decode_commit_request(const frame &f) {
    return parse_body<commit_request>(f, message_tag::commit, [](body_view in, std::size_t &off, commit_request &m) {
        return get_u32(in, off, m.seq) && get_u8(in, off, m.stage) && get_u64(in, off, m.start) &&
            get_u64(in, off, m.span) && get_u8(in, off, m.stride_log2);
    });
}

std::optional<commit_reply> decode_commit_reply(const frame &f) {
    return parse_body<commit_reply>(f, message_tag::commit, [](body_view in, std::size_t &off, commit_reply &m) {
        if (!get_u32(in, off, m.seq)) {
            return false;
        }
        auto a = decode_announcement(in, off);
        if (!a) {
            return false;
        }
        m.posted = std::move(*a);
        auto last = decode_bundle(in, off);
        if (!last) {
            return false;
        }
        m.last = std::move(*last);
        return true;
    });
}

std::optional<children_query> decode_children_query(const frame &f) {
    return parse_body<children_query>(f, message_tag::query_children, [](body_view in, std::size_t &off, children_query &m) {
        return get_u32(in, off, m.seq) && get_u8(in, off, m.stage) && get_u64(in, off, m.start) &&
            get_u8(in, off, m.level) && get_u64(in, off, m.index);
    });
}

std::optional<children_reveal> decode_children_reveal(const frame &f) {
    return parse_body<children_reveal>(f, message_tag::reveal_children, [](body_view in, std::size_t &off, children_reveal &m) {
        return get_u32(in, off, m.seq) && get_hash(in, off, m.left) && get_hash(in, off, m.right);
    });
}

std::optional<leaf_query> decode_leaf_query(const frame &f) {
    return parse_body<leaf_query>(f, message_tag::query_leaf, [](body_view in, std::size_t &off, leaf_query &m) {
        return get_u32(in, off, m.seq) && get_u8(in, off, m.stage) && get_u64(in, off, m.start) &&
            get_u64(in, off, m.index);
    });
}

std::optional<leaf_reveal> decode_leaf_reveal(const frame &f) {
    return parse_body<leaf_reveal>(f, message_tag::reveal_leaf, [](body_view in, std::size_t &off, leaf_reveal &m) {
        if (!get_u32(in, off, m.seq)) {
            return false;
        }
        auto b = decode_bundle(in, off);
        if (!b) {
            return false;
        }
        m.bundle = std::move(*b);
        return true;
    });
}

std::optional<log_query> decode_log_query(const frame &f) {
    return parse_body<log_query>(f, message_tag::query_log, [](body_view in, std::size_t &off, log_query &m) {
        return get_u32(in, off, m.seq) && get_u64(in, off, m.step);
    });
}

std::optional<log_reveal> decode_log_reveal(const frame &f) {
    return parse_body<log_reveal>(f, message_tag::reveal_log, [](body_view in, std::size_t &off, log_reveal &m) {
        if (!get_u32(in, off, m.seq)) {
            return false;
        }
        auto log = decode_log(in, off);
        if (!log) {
            return false;
        }
        m.log = std::move(*log);
        return true;
    });
}

std::optional<hash_query> decode_hash_query(const frame &f) {
    return parse_body<hash_query>(f, message_tag::query_hash, [](body_view in, std::size_t &off, hash_query &m) {
        return get_u32(in, off, m.seq) && get_u64(in, off, m.step);
    });
}

std::optional<hash_reveal> decode_hash_reveal(const frame &f) {
    return parse_body<hash_reveal>(f, message_tag::reveal_hash, [](body_view in, std::size_t &off, hash_reveal &m) {
        return get_u32(in, off, m.seq) && get_hash(in, off, m.value);
    });
}

std::optional<verdict_message> decode_verdict(const frame &f) {
    return parse_body<verdict_message>(f, message_tag::verdict, [](body_view in, std::size_t &off, verdict_message &m) {
        std::uint16_t count = 0;
        if (!get_string(in, off, m.outcome) || !get_hash(in, off, m.final_hash) || !get_u16(in, off, count)) {
            return false;
        }
        m.winners.resize(count);
        for (auto &w : m.winners) {
            if (!get_string(in, off, w)) {
                return false;
            }
        }
        return true;
    });
}

std::optional<std::uint32_t> frame_seq(const frame &f) {
    if (f.tag == static_cast<std::uint8_t>(message_tag::register_party) ||
        f.tag == static_cast<std::uint8_t>(message_tag::verdict)) {
        return std::nullopt;
    }
    std::size_t off = 0;
    std::uint32_t seq = 0;
    if (!get_u32(f.body, off, seq)) {
        return std::nullopt;
    }
    return seq;
}

} // namespace prt
