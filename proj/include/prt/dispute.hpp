#pragma once

/// \file
/// \brief The referee
///
/// Two-party bisection, linear multi-party elimination, and single- and
/// multi-stage tournaments between teams of parties that posted identical
/// computation hashes. The referee only ever sees hashes, proofs and access
/// logs; it never runs the machine.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prt/commitment.hpp"
#include "prt/effort.hpp"
#include "prt/transcript.hpp"
#include "prt/transport.hpp"

namespace prt {

enum class outcome { decided, no_dispute, no_claim };

const char *to_string(outcome o) noexcept;

struct match_record {
    unsigned id = 0;
    unsigned stage = 0;
    unsigned round = 0;
    std::uint64_t start = 0;
    hash root_a{};
    hash root_b{};
    /// "A", "B" or "none".
    std::string winner;
    /// Leaf index a of the first divergence found by bisection (0 if not reached).
    std::uint64_t leaf = 0;
    /// Adjudicated step for dense matches (the transition leaf a-1 -> a).
    std::optional<std::uint64_t> step;
    /// Referee hashes spent on this match, nested stages excluded.
    std::uint64_t referee_hashes = 0;
    bool nested = false;
};

struct dispute_result {
    outcome kind = outcome::no_claim;
    /// Party indices on the winning side (both parties when there is no dispute).
    std::vector<std::size_t> winners;
    std::optional<hash> final_hash;
    /// Outer bracket rounds, or elimination iterations for the linear protocol.
    unsigned rounds = 0;
    std::vector<match_record> matches;
    /// Matches each party took part in, by party index.
    std::vector<unsigned> matches_played;
};

struct referee_config {
    /// State hash of the initial machine state.
    hash initial_hash{};
    std::uint64_t max_steps = 0;
    std::vector<std::string> party_names;
};

class referee {
public:
    referee(transport &net, referee_config config, transcript *log = nullptr, effort_meter *meter = nullptr);

    /// Bisection between parties 0 and 1 over per-step state hashes.
    dispute_result two_party();
    /// Repeated bisection over all parties; each round eliminates every party whose log fails.
    dispute_result linear();
    /// Tournament over computation hashes; a single stage with stride 0 is the dense protocol.
    dispute_result tournament(const stage_config &stages);

private:
    struct team {
        hash root{};
        /// Endpoint leaf: the team's claim for the end of the interval.
        hash claim{};
        std::vector<std::size_t> members;
    };
    struct interval {
        unsigned stage;
        std::uint64_t start;
        std::uint64_t span;
        unsigned stride_log2;
    };

    std::uint32_t next_seq() noexcept {
        return ++m_seq;
    }

    std::vector<team> collect_teams(const interval &iv, const std::vector<std::size_t> &candidates, const hash &first,
                                    const std::vector<hash> &expected_claims);
    std::optional<team> run_bracket(const interval &iv, std::vector<team> teams, bool outer, dispute_result &result);
    std::optional<team> run_match(const interval &iv, const team &a, const team &b, unsigned round,
                                  dispute_result &result);
    std::optional<team> nested(const interval &iv, std::uint64_t leaf, const hash &n, const team &a, const team &b,
                               unsigned match_id, dispute_result &result);

    std::map<std::size_t, hash> query_hashes(const std::vector<std::size_t> &parties, std::uint64_t step);
    dispute_result finish(dispute_result r);

    transport &m_net;
    referee_config m_config;
    transcript *m_log;
    effort_meter m_own_meter;
    effort_meter *m_meter;
    stage_config m_stages;
    std::uint32_t m_seq = 0;
    unsigned m_next_match = 0;
};

} // namespace prt
