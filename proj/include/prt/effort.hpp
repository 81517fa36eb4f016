#pragma once

/// \file
/// \brief Per-actor effort counters
///
/// Work performed by the current thread is attributed to whichever meter is
/// installed by the innermost effort_scope. Hashing and machine stepping
/// report here directly, so any code running on behalf of an actor is metered
/// without being passed a meter explicitly.

#include <cstdint>
#include <map>
#include <string>

namespace prt {

struct effort_meter {
    std::uint64_t hashes = 0;
    /// Subset of hashes spent building computation hashes.
    std::uint64_t commitment_hashes = 0;
    /// Number of full state hashes (Merkle roots over a whole machine state).
    std::uint64_t state_hashes = 0;
    std::uint64_t steps = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t matches = 0;
    std::uint64_t rounds = 0;

    std::uint64_t dispute_hashes() const noexcept {
        return hashes - commitment_hashes;
    }

    effort_meter &operator+=(const effort_meter &other) noexcept;
};

effort_meter operator-(const effort_meter &a, const effort_meter &b) noexcept;

using effort_table = std::map<std::string, effort_meter>;

/// Meter installed on this thread, or nullptr.
effort_meter *current_meter() noexcept;

class effort_scope {
public:
    explicit effort_scope(effort_meter *meter) noexcept;
    ~effort_scope();
    effort_scope(const effort_scope &) = delete;
    effort_scope &operator=(const effort_scope &) = delete;

private:
    effort_meter *m_previous;
};

/// While alive, hashes are also counted as commitment-building hashes.
class commitment_build_scope {
public:
    commitment_build_scope() noexcept;
    ~commitment_build_scope();
    commitment_build_scope(const commitment_build_scope &) = delete;
    commitment_build_scope &operator=(const commitment_build_scope &) = delete;

private:
    bool m_previous;
};

namespace detail {
void count_hash() noexcept;
void count_state_hash() noexcept;
void count_step() noexcept;
} // namespace detail

} // namespace prt
