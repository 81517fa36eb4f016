#include "prt/players.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "prt/merkle.hpp"

namespace prt {

namespace {

constexpr std::uint64_t checkpoint_interval = 64;
constexpr std::size_t checkpoint_limit = 8192;

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::pair<const char *, Enum> (&table)[N], const char *what) {
    for (const auto &[name, value] : table) {
        if (text == name) {
            return value;
        }
    }
    throw std::invalid_argument{std::string{"unknown "} + what + " '" + std::string{text} + "'"};
}

constexpr std::pair<const char *, strategy_kind> kind_names[] = {
    {"honest", strategy_kind::honest},
    {"corrupt_state", strategy_kind::corrupt_state},
    {"corrupt_instruction", strategy_kind::corrupt_instruction},
    {"forge_log", strategy_kind::forge_log},
    {"stall", strategy_kind::stall},
    {"defect", strategy_kind::defect},
};

constexpr std::pair<const char *, forge_mutation> forge_names[] = {
    {"value_flip", forge_mutation::value_flip},
    {"address_swap", forge_mutation::address_swap},
    {"sibling_flip", forge_mutation::sibling_flip},
    {"entry_drop", forge_mutation::entry_drop},
    {"entry_dup", forge_mutation::entry_dup},
};

constexpr std::pair<const char *, stall_phase> phase_names[] = {
    {"commit", stall_phase::commit},
    {"bisect", stall_phase::bisect},
    {"reveal", stall_phase::reveal},
    {"log", stall_phase::log},
    {"inner", stall_phase::inner},
};

std::uint64_t parse_u64(std::string_view text, std::string_view key) {
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument{"bad value for " + std::string{key}};
    }
    return v;
}

std::string hex_word(word w) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w, 16);
    return "0x" + std::string(buf, ptr);
}

// Decorated fetch: executes `replacement` in place of whatever is fetched.
struct replaced_fetch {
    machine_state &state;
    word replacement;

    word read(std::uint64_t a) {
        return state[a];
    }
    word fetch(std::uint64_t) {
        return replacement;
    }
    void write(std::uint64_t a, word v) {
        state[a] = v;
    }
};

} // namespace

const char *to_string(strategy_kind kind) noexcept {
    for (const auto &[name, value] : kind_names) {
        if (value == kind) {
            return name;
        }
    }
    return "unknown";
}

const char *to_string(forge_mutation m) noexcept {
    for (const auto &[name, value] : forge_names) {
        if (value == m) {
            return name;
        }
    }
    return "unknown";
}

const char *to_string(stall_phase p) noexcept {
    for (const auto &[name, value] : phase_names) {
        if (value == p) {
            return name;
        }
    }
    return "unknown";
}

std::string to_string(const strategy &s) {
    std::string out = to_string(s.kind);
    std::vector<std::string> params;
    switch (s.kind) {
        case strategy_kind::honest:
            break;
        case strategy_kind::corrupt_state:
        case strategy_kind::forge_log:
            params.push_back("step=" + std::to_string(s.step));
            if (s.address) {
                params.push_back("address=" + std::to_string(*s.address));
            }
            if (s.value) {
                params.push_back("value=" + hex_word(*s.value));
            }
            if (s.kind == strategy_kind::forge_log) {
                params.push_back(std::string{"mutation="} + to_string(s.forge));
            }
            break;
        case strategy_kind::corrupt_instruction:
            params.push_back("step=" + std::to_string(s.step));
            if (s.instruction) {
                params.push_back("instruction=" + hex_word(*s.instruction));
            }
            break;
        case strategy_kind::stall:
            params.push_back(std::string{"phase="} + to_string(s.phase));
            if (s.step != 0) {
                params.push_back("step=" + std::to_string(s.step));
            }
            break;
        case strategy_kind::defect:
            params.push_back("stage=" + std::to_string(s.stage));
            break;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        out += (i == 0 ? ":" : ",") + params[i];
    }
    return out;
}

strategy parse_strategy(std::string_view text) {
    strategy s;
    const auto colon = text.find(':');
    s.kind = parse_enum(text.substr(0, colon), kind_names, "strategy");
    if (colon == std::string_view::npos) {
        return s;
    }
    auto rest = text.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument{"strategy parameter needs key=value: '" + std::string{item} + "'"};
        }
        const auto key = item.substr(0, eq);
        const auto value = item.substr(eq + 1);
        if (key == "step") {
            s.step = parse_u64(value, key);
        } else if (key == "address") {
            s.address = parse_u64(value, key);
        } else if (key == "value") {
            s.value = parse_u64(value, key);
        } else if (key == "instruction") {
            s.instruction = parse_u64(value, key);
        } else if (key == "mutation") {
            s.forge = parse_enum(value, forge_names, "log mutation");
        } else if (key == "phase") {
            s.phase = parse_enum(value, phase_names, "stall phase");
        } else if (key == "stage") {
            s.stage = static_cast<unsigned>(parse_u64(value, key));
            if (s.stage == 0) {
                throw std::invalid_argument{"defect stage is one-based"};
            }
        } else {
            throw std::invalid_argument{"unknown strategy parameter '" + std::string{key} + "'"};
        }
    }
    const bool needs_step = s.kind == strategy_kind::corrupt_state || s.kind == strategy_kind::corrupt_instruction ||
        s.kind == strategy_kind::forge_log;
    if (needs_step && s.step == 0) {
        throw std::invalid_argument{std::string{to_string(s.kind)} + " needs step >= 1"};
    }
    return s;
}

trace::trace(std::uint64_t origin, machine_state state, std::vector<mutation> mutations) :
    m_origin{origin},
    m_mutations{std::move(mutations)} {
    std::stable_sort(m_mutations.begin(), m_mutations.end(),
                     [](const mutation &a, const mutation &b) { return a.step < b.step; });
    std::erase_if(m_mutations, [&](const mutation &m) {
        return m.step < origin || (m.step == origin && m.type == mutation::kind::replace_instruction);
    });
    for (const auto &m : m_mutations) {
        if (m.step == origin) {
            state[m.address] = m.value;
        }
    }
    m_checkpoints.emplace(origin, std::move(state));
}

bool trace::mutations_in(std::uint64_t from, std::uint64_t to) const {
    return std::any_of(m_mutations.begin(), m_mutations.end(),
                       [&](const mutation &m) { return m.step > from && m.step <= to; });
}

void trace::advance_to(machine_state &state, std::uint64_t from, std::uint64_t to) const {
    std::uint64_t cur = from;
    for (const auto &m : m_mutations) {
        if (m.step <= from) {
            continue;
        }
        if (m.step > to) {
            break;
        }
        if (m.type == mutation::kind::set_word) {
            advance(state, m.step - cur);
            state[m.address] = m.value;
        } else {
            advance(state, m.step - 1 - cur);
            detail::count_step();
            replaced_fetch access{state, m.value};
            execute_step(access, state.address_mask());
        }
        cur = m.step;
    }
    advance(state, to - cur);
}

void trace::keep(std::uint64_t step, const machine_state &state) {
    if (m_checkpoints.size() >= checkpoint_limit) {
        auto first = std::move(m_checkpoints.begin()->second);
        m_checkpoints.clear();
        m_checkpoints.emplace(m_origin, std::move(first));
    }
    m_checkpoints.emplace(step, state);
}

machine_state trace::state_at(std::uint64_t step) {
    if (step < m_origin) {
        throw std::out_of_range{"step precedes the trace origin"};
    }
    auto it = m_checkpoints.upper_bound(step);
    --it;
    if (it->first == step) {
        return it->second;
    }
    machine_state state = it->second;
    advance_to(state, it->first, step);
    keep(step, state);
    return state;
}

hash trace::hash_at(std::uint64_t step) {
    return state_hash(state_at(step));
}

access_log trace::log_at(std::uint64_t step) {
    auto state = state_at(step);
    auto tree = state_tree(state);
    return step_with_log(state, tree);
}

std::vector<hash> trace::sample(std::uint64_t start, std::uint64_t span, unsigned stride_log2) {
    const std::uint64_t stride = std::uint64_t{1} << stride_log2;
    const std::uint64_t n = span >> stride_log2;
    auto state = state_at(start);
    std::vector<hash> points;
    points.reserve(n + 1);
    points.push_back(state_hash(state));
    std::uint64_t cur = start;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (is_halted(state) && !mutations_in(cur, start + span)) {
            points.resize(n + 1, points.back());
            break;
        }
        advance_to(state, cur, cur + stride);
        cur += stride;
        if (stride >= checkpoint_interval || cur % checkpoint_interval == 0) {
            keep(cur, state);
        }
        points.push_back(state_hash(state));
    }
    return points;
}

access_log forge_log(access_log log, forge_mutation m) {
    if (log.entries.empty()) {
        return log;
    }
    switch (m) {
        case forge_mutation::value_flip:
            log.entries.back().prior ^= 1;
            break;
        case forge_mutation::address_swap:
            if (log.entries.size() >= 2) {
                std::swap(log.entries[0].address, log.entries[1].address);
            } else {
                log.entries[0].address ^= 1;
            }
            break;
        case forge_mutation::sibling_flip:
            if (!log.entries[0].siblings.empty()) {
                log.entries[0].siblings[0][0] ^= 0x80;
            }
            break;
        case forge_mutation::entry_drop:
            log.entries.pop_back();
            break;
        case forge_mutation::entry_dup:
            log.entries.push_back(log.entries.back());
            break;
    }
    return log;
}

namespace {

std::vector<mutation> view_mutations(const strategy &s, std::uint64_t address, word value, std::uint64_t max_steps) {
    switch (s.kind) {
        case strategy_kind::corrupt_state:
        case strategy_kind::forge_log:
            return {{mutation::kind::set_word, s.step, address, value}};
        case strategy_kind::stall:
            if (s.step != 0) {
                return {{mutation::kind::set_word, s.step, address, value}};
            }
            return {};
        case strategy_kind::corrupt_instruction:
            return {{mutation::kind::replace_instruction, s.step, 0,
                     s.instruction.value_or(encode({opcode::loadi, 7, 0, 0x666}))}};
        case strategy_kind::defect:
            if (s.stage == 1) {
                return {{mutation::kind::set_word, std::max<std::uint64_t>(max_steps / 2, 1), address, value}};
            }
            return {};
        case strategy_kind::honest:
            return {};
    }
    return {};
}

} // namespace

player_engine::player_engine(strategy plan, machine_state initial, std::uint64_t max_steps) :
    m_plan{std::move(plan)},
    m_max_steps{max_steps},
    m_state_size{initial.size()},
    m_view{0, initial,
           view_mutations(m_plan, m_plan.address.value_or(initial.size() - 1),
                          m_plan.value.value_or(word{0x5eed000000000000} + m_plan.step), max_steps)} {}

std::uint64_t player_engine::corruption_address() const {
    return m_plan.address.value_or(m_state_size - 1);
}

word player_engine::corruption_value(std::uint64_t step) const {
    return m_plan.value.value_or(word{0x5eed000000000000} + step);
}

bool player_engine::stalls(const frame &query) const {
    if (m_plan.kind != strategy_kind::stall) {
        return false;
    }
    const auto tag = static_cast<message_tag>(query.tag);
    switch (m_plan.phase) {
        case stall_phase::commit:
            if (tag == message_tag::commit) {
                auto q = decode_commit_request(query);
                return q && q->stage == 0;
            }
            if (tag == message_tag::query_hash) {
                auto q = decode_hash_query(query);
                return q && q->step == m_max_steps;
            }
            return false;
        case stall_phase::inner:
            if (tag == message_tag::commit) {
                auto q = decode_commit_request(query);
                return q && q->stage > 0;
            }
            return false;
        case stall_phase::bisect:
            if (tag == message_tag::query_hash) {
                auto q = decode_hash_query(query);
                return q && q->step != m_max_steps;
            }
            return tag == message_tag::query_children;
        case stall_phase::reveal:
            return tag == message_tag::query_leaf;
        case stall_phase::log:
            return tag == message_tag::query_log;
    }
    return false;
}

const commitment *player_engine::find(unsigned stage, std::uint64_t start) const {
    auto it = m_commitments.find({stage, start});
    return it == m_commitments.end() ? nullptr : &it->second;
}

std::optional<hash> player_engine::outer_claim(unsigned stage, std::uint64_t step) const {
    for (const auto &[key, c] : m_commitments) {
        if (key.first != stage || step < c.start() || step > c.start() + c.span()) {
            continue;
        }
        const auto offset = step - c.start();
        if (offset % (std::uint64_t{1} << c.stride_log2()) == 0) {
            return c.leaf(offset >> c.stride_log2());
        }
    }
    return std::nullopt;
}

trace &player_engine::view_for(std::uint64_t step) {
    trace *best = &m_view;
    unsigned best_stage = 0;
    for (auto &d : m_defects) {
        if (step >= d.start && step < d.start + d.span && (best == &m_view || d.stage > best_stage)) {
            best = d.run.get();
            best_stage = d.stage;
        }
    }
    return *best;
}

access_log player_engine::log_for(std::uint64_t step) {
    auto log = view_for(step).log_at(step);
    if (m_plan.kind == strategy_kind::forge_log && step + 1 == m_plan.step) {
        return forge_log(std::move(log), m_plan.forge);
    }
    return log;
}

const commitment *player_engine::build(const commit_request &q) {
    if (q.stride_log2 >= 64 || q.span == 0 || (q.span >> q.stride_log2) == 0 ||
        !std::has_single_bit(q.span >> q.stride_log2) || (q.span & ((std::uint64_t{1} << q.stride_log2) - 1)) != 0 ||
        (q.span >> q.stride_log2) > (std::uint64_t{1} << 24)) {
        return nullptr;
    }
    if (const auto *c = find(q.stage, q.start)) {
        return c;
    }
    const commitment_build_scope building;
    std::vector<hash> points;
    const bool defecting = m_plan.kind == strategy_kind::defect && q.stage >= 1 && q.stage + 1u >= m_plan.stage;
    if (defecting) {
        auto base = view_for(q.start).state_at(q.start);
        const std::uint64_t mid = q.start + std::max<std::uint64_t>(q.span / 2, 1);
        auto run = std::make_unique<trace>(
            q.start, std::move(base),
            std::vector<mutation>{{mutation::kind::set_word, mid, corruption_address(), corruption_value(mid)}});
        points = run->sample(q.start, q.span, q.stride_log2);
        if (auto claim = outer_claim(q.stage - 1u, q.start + q.span)) {
            points.back() = *claim;
        }
        m_defects.push_back({q.stage, q.start, q.span, std::move(run)});
    } else {
        points = view_for(q.start).sample(q.start, q.span, q.stride_log2);
    }
    auto [it, inserted] = m_commitments.emplace(std::make_pair(unsigned{q.stage}, q.start),
                                                commitment{q.start, q.span, q.stride_log2, points});
    return &it->second;
}

std::optional<frame> player_engine::answer(const frame &query) {
    if (stalls(query)) {
        return std::nullopt;
    }
    switch (static_cast<message_tag>(query.tag)) {
        case message_tag::commit: {
            auto q = decode_commit_request(query);
            if (!q) {
                return std::nullopt;
            }
            const auto *c = build(*q);
            if (c == nullptr) {
                return std::nullopt;
            }
            return encode(commit_reply{q->seq, announce(*c), c->final_leaf_proof()});
        }
        case message_tag::query_children: {
            auto q = decode_children_query(query);
            const commitment *c = q ? find(q->stage, q->start) : nullptr;
            if (c == nullptr || q->level >= c->depth() || (q->index >> q->level) != 0) {
                return std::nullopt;
            }
            auto [l, r] = c->children(q->level, q->index);
            return encode(children_reveal{q->seq, l, r});
        }
        case message_tag::query_leaf: {
            auto q = decode_leaf_query(query);
            const commitment *c = q ? find(q->stage, q->start) : nullptr;
            if (c == nullptr || q->index >= c->leaf_count()) {
                return std::nullopt;
            }
            return encode(leaf_reveal{q->seq, c->leaf_with_proof(q->index)});
        }
        case message_tag::query_log: {
            auto q = decode_log_query(query);
            if (!q || q->step >= m_max_steps) {
                return std::nullopt;
            }
            return encode(log_reveal{q->seq, log_for(q->step)});
        }
        case message_tag::query_hash: {
            auto q = decode_hash_query(query);
            if (!q || q->step > m_max_steps) {
                return std::nullopt;
            }
            return encode(hash_reveal{q->seq, view_for(q->step).hash_at(q->step)});
        }
        default:
            return std::nullopt;
    }
}

player_factory::player_factory(machine_state initial, std::uint64_t max_steps) :
    m_initial{std::move(initial)},
    m_max_steps{max_steps} {}

player player_factory::make(std::string name, const strategy &plan) {
    if (plan.kind == strategy_kind::honest) {
        return {std::move(name), std::make_shared<player_engine>(plan, m_initial, m_max_steps)};
    }
    auto &shared = m_shared[to_string(plan)];
    if (!shared) {
        shared = std::make_shared<player_engine>(plan, m_initial, m_max_steps);
    }
    return {std::move(name), shared};
}

} // namespace prt
