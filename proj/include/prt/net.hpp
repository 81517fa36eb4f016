#pragma once

/// \file
/// \brief TCP referee service and party client
///
/// The service accepts connections during a registration window; each client
/// opens with a REGISTER frame carrying its name and strategy. Parties are
/// then ordered by name and the protocol runs over the same frames as the
/// simulator, with wall-clock timeouts. A reader thread per connection feeds
/// one ordered queue that the referee drains.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prt/harness.hpp"

namespace prt {

struct serve_options {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    /// How long to accept registrations.
    int registration_ms = 2000;
    /// Stop registering early once this many parties have joined (0: use the full window).
    std::size_t expected_parties = 0;
    int timeout_ms = 2000;
};

struct serve_report {
    std::vector<std::string> names;
    std::vector<std::string> strategies;
    dispute_result result;
    transcript log;
    effort_meter referee_effort;
};

/// Runs one dispute as the referee. `on_listening` receives the bound port
/// before registration opens. Throws std::runtime_error on socket errors.
serve_report serve(const serve_options &options, const scenario &settings,
                   const std::function<void(std::uint16_t)> &on_listening = {});

struct client_report {
    verdict_message verdict;
    effort_meter effort;
};

/// Connects as one party, answers queries until the verdict arrives.
/// Returns nullopt if the connection closes first.
std::optional<client_report> run_client(const std::string &host, std::uint16_t port, const std::string &name,
                                        const strategy &plan, const machine_state &initial, std::uint64_t max_steps);

} // namespace prt
