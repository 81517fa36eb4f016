#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <thread>

#include "doctest.h"
#include "prt/net.hpp"
#include "scenario_support.hpp"

using namespace prt;
using test::make_scenario;

namespace {

struct served {
    std::future<serve_report> report;
    std::uint16_t port = 0;
};

served start(const scenario &s, std::size_t parties, int registration_ms = 5000, int timeout_ms = 1000) {
    auto port = std::make_shared<std::promise<std::uint16_t>>();
    auto ready = port->get_future();
    served out;
    out.report = std::async(std::launch::async, [=] {
        return serve({"127.0.0.1", 0, registration_ms, parties, timeout_ms}, s,
                     [port](std::uint16_t p) { port->set_value(p); });
    });
    out.port = ready.get();
    return out;
}

std::vector<std::string> names_of(const std::vector<std::string> &names, const std::vector<std::size_t> &idx) {
    std::vector<std::string> out;
    for (auto i : idx) {
        out.push_back(names[i]);
    }
    return out;
}

// Registers, answers queries honestly-or-not per `plan`, and hangs up at the first bisection query.
void quitter(std::uint16_t port, const strategy &plan, const machine_state &initial, std::uint64_t t) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr *>(&addr), sizeof addr) == 0);
    const auto send = [&](const frame &f) {
        const auto data = encode_frame(f);
        return ::send(fd, data.data(), data.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(data.size());
    };
    send(encode(register_message{"zz-quitter", to_string(plan)}));
    player_engine engine{plan, initial, t};
    bytes buffer;
    std::uint8_t chunk[4096];
    for (;;) {
        const auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) {
            break;
        }
        buffer.insert(buffer.end(), chunk, chunk + n);
        bool quit = false;
        while (auto decoded = decode_frame(buffer)) {
            auto [f, used] = std::move(*decoded);
            buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(used));
            if (f.tag == static_cast<std::uint8_t>(message_tag::query_children)) {
                quit = true;
                break;
            }
            if (auto reply = engine.answer(f)) {
                send(*reply);
            }
        }
        if (quit) {
            break;
        }
    }
    ::close(fd);
}

} // namespace

TEST_CASE("loopback dispute matches the simulator") {
    auto s = make_scenario("fib.asm", 256, run_mode::tournament, {"honest", "corrupt_state:step=33", "forge_log:step=90"});
    const auto sim = simulate(s);

    auto server = start(s, 3);
    std::vector<std::future<std::optional<client_report>>> clients;
    for (const auto &p : s.parties) {
        clients.push_back(std::async(std::launch::async, [&, p] {
            return run_client("127.0.0.1", server.port, p.name, p.plan, s.initial, s.max_steps);
        }));
    }
    const auto report = server.report.get();
    CHECK(report.names == sim.names);
    CHECK(report.result.kind == sim.result.kind);
    CHECK(report.result.final_hash == sim.result.final_hash);
    CHECK(names_of(report.names, report.result.winners) == names_of(sim.names, sim.result.winners));
    CHECK(verify_transcript(report.log.lines()).empty());
    for (auto &c : clients) {
        const auto r = c.get();
        REQUIRE(r);
        CHECK(r->verdict.winners == std::vector<std::string>{"000-honest"});
    }
}

TEST_CASE("a client disconnecting mid-bisection loses its match") {
    auto s = make_scenario("fib.asm", 256, run_mode::tournament, {"honest"});
    auto server = start(s, 2);
    auto honest = std::async(std::launch::async, [&] {
        return run_client("127.0.0.1", server.port, "000-honest", s.parties[0].plan, s.initial, s.max_steps);
    });
    std::thread gone{quitter, server.port, parse_strategy("corrupt_state:step=40"), s.initial, s.max_steps};
    const auto report = server.report.get();
    gone.join();
    CHECK(report.result.kind == outcome::decided);
    CHECK(names_of(report.names, report.result.winners) == std::vector<std::string>{"000-honest"});
    CHECK(report.result.final_hash == honest_final_hash(s.initial, s.max_steps));
    REQUIRE(honest.get());
}

TEST_CASE("no registrations within the window gives NO_CLAIM") {
    auto s = make_scenario("sum.asm", 64, run_mode::tournament, {});
    auto server = start(s, 0, 0);
    const auto report = server.report.get();
    CHECK(report.result.kind == outcome::no_claim);
    CHECK(report.names.empty());
}

TEST_CASE("garbage registration is dropped and the dispute still runs") {
    auto s = make_scenario("sum.asm", 64, run_mode::tournament, {"honest", "corrupt_state:step=7"});
    auto server = start(s, 2, 3000, 500);
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(server.port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr *>(&addr), sizeof addr) == 0);
        const auto junk = encode_frame(frame{0x42, {1, 2, 3}});
        ::send(fd, junk.data(), junk.size(), MSG_NOSIGNAL);
        ::close(fd);
    }
    std::vector<std::future<std::optional<client_report>>> clients;
    for (const auto &p : s.parties) {
        clients.push_back(std::async(std::launch::async, [&, p] {
            return run_client("127.0.0.1", server.port, p.name, p.plan, s.initial, s.max_steps);
        }));
    }
    const auto report = server.report.get();
    CHECK(report.names.size() == 2);
    CHECK(names_of(report.names, report.result.winners) == std::vector<std::string>{"000-honest"});
    for (auto &c : clients) {
        CHECK(c.get());
    }
}
