#pragma once

/// \file
/// \brief Message delivery between the referee and the parties

#include <cstddef>
#include <functional>
#include <span>

#include "prt/wire.hpp"

namespace prt {

struct outbound {
    std::size_t party = 0;
    frame message;
};

/// Called with the index of the request a reply answers; returning true
/// stops the exchange (remaining replies are discarded).
using reply_handler = std::function<bool(std::size_t request, const frame &reply)>;

class transport {
public:
    virtual ~transport() = default;

    /// Sends all requests at once and feeds replies to `on_reply` in arrival
    /// order until it returns true or the timeout expires. A reply counts
    /// only if it echoes the sequence number of its request.
    virtual void exchange(std::span<const outbound> requests, const reply_handler &on_reply) = 0;

    /// One-way message to every party.
    virtual void broadcast(const frame &message) = 0;
};

} // namespace prt
