#include "prt/effort.hpp"

namespace prt {

namespace {
thread_local effort_meter *t_meter = nullptr;
thread_local bool t_building_commitment = false;
} // namespace

effort_meter &effort_meter::operator+=(const effort_meter &other) noexcept {
    hashes += other.hashes;
    commitment_hashes += other.commitment_hashes;
    state_hashes += other.state_hashes;
    steps += other.steps;
    messages_sent += other.messages_sent;
    bytes_sent += other.bytes_sent;
    matches += other.matches;
    rounds += other.rounds;
    return *this;
}

effort_meter operator-(const effort_meter &a, const effort_meter &b) noexcept {
    effort_meter d;
    d.hashes = a.hashes - b.hashes;
    d.commitment_hashes = a.commitment_hashes - b.commitment_hashes;
    d.state_hashes = a.state_hashes - b.state_hashes;
    d.steps = a.steps - b.steps;
    d.messages_sent = a.messages_sent - b.messages_sent;
    d.bytes_sent = a.bytes_sent - b.bytes_sent;
    d.matches = a.matches - b.matches;
    d.rounds = a.rounds - b.rounds;
    return d;
}

effort_meter *current_meter() noexcept {
    return t_meter;
}

effort_scope::effort_scope(effort_meter *meter) noexcept : m_previous{t_meter} {
    t_meter = meter;
}

effort_scope::~effort_scope() {
    t_meter = m_previous;
}

commitment_build_scope::commitment_build_scope() noexcept : m_previous{t_building_commitment} {
    t_building_commitment = true;
}

commitment_build_scope::~commitment_build_scope() {
    t_building_commitment = m_previous;
}

namespace detail {

void count_hash() noexcept {
    if (t_meter != nullptr) {
        ++t_meter->hashes;
        if (t_building_commitment) {
            ++t_meter->commitment_hashes;
        }
    }
}

void count_state_hash() noexcept {
    if (t_meter != nullptr) {
        ++t_meter->state_hashes;
    }
}

void count_step() noexcept {
    if (t_meter != nullptr) {
        ++t_meter->steps;
    }
}

} // namespace detail

} // namespace prt
