#pragma once

/// \file
/// \brief Honest and dishonest parties
///
/// A party answers referee frames with reply frames (or stays silent). All
/// dishonest behaviour is layered over the honest machine: a trace applies
/// state or instruction mutations at chosen steps, and the engine decides
/// what to commit to and which logs to hand out.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prt/commitment.hpp"
#include "prt/effort.hpp"
#include "prt/protocol.hpp"
#include "prt/steplog.hpp"

namespace prt {

enum class strategy_kind { honest, corrupt_state, corrupt_instruction, forge_log, stall, defect };
enum class forge_mutation { value_flip, address_swap, sibling_flip, entry_drop, entry_dup };
enum class stall_phase { commit, bisect, reveal, log, inner };

const char *to_string(strategy_kind kind) noexcept;
const char *to_string(forge_mutation m) noexcept;
const char *to_string(stall_phase p) noexcept;

struct strategy {
    strategy_kind kind = strategy_kind::honest;
    /// Corruption step (corrupt_*, forge_log, stall; 0 leaves a staller's claim honest).
    std::uint64_t step = 0;
    /// Word overwritten by state corruption; defaults to the last word of the state.
    std::optional<std::uint64_t> address;
    /// Value written; defaults to a marker derived from the step.
    std::optional<word> value;
    /// Replacement instruction for corrupt_instruction; defaults to LOADI r7, 0x666.
    std::optional<word> instruction;
    forge_mutation forge = forge_mutation::value_flip;
    stall_phase phase = stall_phase::commit;
    /// First (one-based) stage at which a defector lies.
    unsigned stage = 2;

    bool operator==(const strategy &) const = default;
};

/// Text form, e.g. "corrupt_state:step=5,address=40,value=7" or "stall:phase=log,step=9".
std::string to_string(const strategy &s);
/// Throws std::invalid_argument for unknown names or parameters.
strategy parse_strategy(std::string_view text);

struct mutation {
    enum class kind { set_word, replace_instruction } type = kind::set_word;
    /// set_word: applied to the state after `step` transitions.
    /// replace_instruction: transition step-1 -> step executes `value` instead of the fetched word.
    std::uint64_t step = 0;
    std::uint64_t address = 0;
    word value = 0;
};

/// A run of the machine from `origin`, with optional mutations, and a
/// checkpoint store so states can be recovered without replaying from the start.
class trace {
public:
    trace(std::uint64_t origin, machine_state state, std::vector<mutation> mutations = {});

    std::uint64_t origin() const noexcept {
        return m_origin;
    }

    /// State after `step` transitions (step >= origin).
    machine_state state_at(std::uint64_t step);
    /// Full state hash at `step`.
    hash hash_at(std::uint64_t step);
    /// Access log of the transition step -> step + 1, recorded on this trace's state.
    access_log log_at(std::uint64_t step);
    /// State hashes at start + i 2^g for i = 0..span/2^g.
    std::vector<hash> sample(std::uint64_t start, std::uint64_t span, unsigned stride_log2);

    std::size_t checkpoint_count() const noexcept {
        return m_checkpoints.size();
    }

private:
    void advance_to(machine_state &state, std::uint64_t from, std::uint64_t to) const;
    bool mutations_in(std::uint64_t from, std::uint64_t to) const;
    void keep(std::uint64_t step, const machine_state &state);

    std::uint64_t m_origin;
    std::vector<mutation> m_mutations; // sorted by step
    std::map<std::uint64_t, machine_state> m_checkpoints;
};

/// Answers referee queries according to a strategy. Clones of one strategy
/// can share an engine; an engine is not thread-safe.
class player_engine {
public:
    player_engine(strategy plan, machine_state initial, std::uint64_t max_steps);

    const strategy &plan() const noexcept {
        return m_plan;
    }

    std::optional<frame> answer(const frame &query);

private:
    struct defect_interval {
        unsigned stage;
        std::uint64_t start;
        std::uint64_t span;
        std::unique_ptr<trace> run;
    };

    bool stalls(const frame &query) const;
    const commitment *build(const commit_request &q);
    const commitment *find(unsigned stage, std::uint64_t start) const;
    std::optional<hash> outer_claim(unsigned stage, std::uint64_t step) const;
    trace &view_for(std::uint64_t step);
    access_log log_for(std::uint64_t step);
    word corruption_value(std::uint64_t step) const;
    std::uint64_t corruption_address() const;

    strategy m_plan;
    std::uint64_t m_max_steps;
    std::uint64_t m_state_size;
    trace m_view;
    std::vector<defect_interval> m_defects;
    std::map<std::pair<unsigned, std::uint64_t>, commitment> m_commitments;
};

/// Applies one forge class to a genuine log.
access_log forge_log(access_log log, forge_mutation m);

/// A named party bound to a (possibly shared) engine.
struct player {
    std::string name;
    std::shared_ptr<player_engine> engine;

    std::optional<frame> answer(const frame &query) const {
        return engine->answer(query);
    }
};

/// Creates players, sharing one engine between dishonest clones of an
/// identical strategy. Honest players always get an engine of their own.
class player_factory {
public:
    player_factory(machine_state initial, std::uint64_t max_steps);

    player make(std::string name, const strategy &plan);

private:
    machine_state m_initial;
    std::uint64_t m_max_steps;
    std::map<std::string, std::shared_ptr<player_engine>> m_shared;
};

} // namespace prt
