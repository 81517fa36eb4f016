#pragma once

/// \file
/// \brief Scenarios, the simulated network and the in-process simulator
///
/// The simulated network runs on a tick clock. Every query is answered
/// immediately by the addressed player (work is charged to that player's
/// meter) and the reply is delivered after a seeded latency of 1..max_latency
/// ticks; replies later than the timeout are dropped.

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "prt/dispute.hpp"
#include "prt/players.hpp"
#include "prt/transport.hpp"

namespace prt {

enum class run_mode { two_party, linear, tournament, multistage };

const char *to_string(run_mode m) noexcept;
run_mode parse_mode(std::string_view text);

struct party_entry {
    std::string name;
    strategy plan;
};

struct scenario {
    std::string name;
    std::string program;
    machine_state initial;
    std::uint64_t max_steps = 1 << 12;
    run_mode mode = run_mode::tournament;
    /// Stride exponents for multistage runs.
    std::vector<unsigned> strides{10, 5, 0};
    std::vector<party_entry> parties;
    std::uint64_t seed = 1;
    std::uint64_t timeout_ticks = 64;
    std::uint64_t max_latency = 1;
    std::uint64_t tick_limit = 1'000'000'000;
    /// "honest", "no_dispute", "no_claim" or "winner:<party name>".
    std::string expect = "honest";

    /// Stage layout used for tournament modes.
    stage_config stages() const;
};

class scenario_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Party names are "<index>-<strategy>", index zero-padded to three digits.
std::string party_name(std::size_t index, const strategy &plan);

/// Builds a scenario from JSON; relative program paths resolve against `base`.
scenario parse_scenario(const nlohmann::json &j, const std::filesystem::path &base = {});
scenario load_scenario(const std::filesystem::path &path);

/// Appends `count` parties; with a nonzero step_stride clone i uses step + i * step_stride.
void add_parties(scenario &s, const strategy &plan, std::size_t count = 1, std::uint64_t step_stride = 0);

class tick_limit_exceeded : public std::runtime_error {
public:
    explicit tick_limit_exceeded(std::uint64_t limit) :
        std::runtime_error{"TICK_LIMIT: dispute exceeded " + std::to_string(limit) + " ticks"} {}
};

class sim_network : public transport {
public:
    sim_network(std::vector<player> &players, std::vector<effort_meter> &meters, effort_meter &referee_meter,
                std::uint64_t seed, std::uint64_t timeout_ticks, std::uint64_t max_latency, std::uint64_t tick_limit);

    void exchange(std::span<const outbound> requests, const reply_handler &on_reply) override;
    void broadcast(const frame &message) override;

    std::uint64_t now() const noexcept {
        return m_now;
    }

private:
    void advance(std::uint64_t tick);

    std::vector<player> &m_players;
    std::vector<effort_meter> &m_meters;
    effort_meter &m_referee;
    std::mt19937_64 m_rng;
    std::uint64_t m_timeout;
    std::uint64_t m_max_latency;
    std::uint64_t m_tick_limit;
    std::uint64_t m_now = 0;
};

struct run_report {
    std::vector<std::string> names;
    dispute_result result;
    transcript log;
    effort_table effort;
    std::uint64_t ticks = 0;
};

/// Runs the dispute described by `s` in-process. Throws tick_limit_exceeded.
run_report simulate(const scenario &s);

/// Runs the protocol for `mode` against an already wired transport.
dispute_result run_protocol(referee &r, const scenario &s);

/// state_hash(run(initial, t)): the answer an honest party must end up with.
hash honest_final_hash(const machine_state &initial, std::uint64_t max_steps);

struct expectation_check {
    bool passed = false;
    std::string detail;
};

/// With `verify_final` the winning claim is also checked against an
/// independent re-execution of the program.
expectation_check check_expectation(const scenario &s, const std::vector<std::string> &names,
                                    const dispute_result &result, bool verify_final = true);

/// Structured summary of a run, including per-actor effort.
nlohmann::ordered_json report_json(const scenario &s, const run_report &report, const expectation_check &check);
nlohmann::ordered_json effort_json(const effort_table &effort);

} // namespace prt
