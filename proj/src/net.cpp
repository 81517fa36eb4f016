#include "prt/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <numeric>
#include <thread>

#include "prt/merkle.hpp"

namespace prt {

namespace {

using clock = std::chrono::steady_clock;

[[noreturn]] void fail(const std::string &what) {
    throw std::runtime_error{what + ": " + std::strerror(errno)};
}

bool send_all(int fd, const bytes &data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

bool recv_all(int fd, std::uint8_t *out, std::size_t len) {
    std::size_t off = 0;
    while (off < len) {
        const auto n = ::recv(fd, out + off, len - off, 0);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

std::optional<frame> read_frame(int fd) {
    std::uint8_t head[4];
    if (!recv_all(fd, head, 4)) {
        return std::nullopt;
    }
    const std::uint32_t len = (std::uint32_t{head[0]} << 24) | (std::uint32_t{head[1]} << 16) |
        (std::uint32_t{head[2]} << 8) | head[3];
    if (len == 0 || len > max_frame_size) {
        return std::nullopt;
    }
    bytes body(len);
    if (!recv_all(fd, body.data(), len)) {
        return std::nullopt;
    }
    frame f;
    f.tag = body[0];
    f.body.assign(body.begin() + 1, body.end());
    return f;
}

bool write_frame(int fd, const frame &f) {
    return send_all(fd, encode_frame(f));
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

int wait_readable(int fd, int timeout_ms) {
    pollfd p{fd, POLLIN, 0};
    return ::poll(&p, 1, timeout_ms);
}

struct connection {
    int fd = -1;
    std::string name;
    std::string strategy;
};

class socket_network : public transport {
public:
    socket_network(std::vector<connection> &conns, effort_meter &meter, int timeout_ms) :
        m_conns{conns},
        m_meter{meter},
        m_timeout{timeout_ms} {
        for (std::size_t i = 0; i < m_conns.size(); ++i) {
            m_readers.emplace_back([this, i] { read_loop(i); });
        }
    }

    ~socket_network() override {
        for (auto &c : m_conns) {
            ::shutdown(c.fd, SHUT_RDWR);
        }
        for (auto &t : m_readers) {
            t.join();
        }
        for (auto &c : m_conns) {
            ::close(c.fd);
        }
    }

    void exchange(std::span<const outbound> requests, const reply_handler &on_reply) override {
        std::vector<std::optional<std::uint32_t>> seqs;
        std::size_t outstanding = 0;
        {
            std::lock_guard lock{m_mutex};
            m_queue.clear(); // anything still queued answers an earlier exchange
        }
        for (const auto &q : requests) {
            seqs.push_back(frame_seq(q.message));
            ++m_meter.messages_sent;
            m_meter.bytes_sent += 5 + q.message.body.size();
            if (write_frame(m_conns[q.party].fd, q.message)) {
                ++outstanding;
            }
        }
        const auto deadline = clock::now() + std::chrono::milliseconds{m_timeout};
        std::vector<bool> answered(requests.size(), false);
        while (outstanding > 0) {
            std::unique_lock lock{m_mutex};
            if (!m_cv.wait_until(lock, deadline, [&] { return !m_queue.empty(); })) {
                return;
            }
            auto [party, reply] = std::move(m_queue.front());
            m_queue.pop_front();
            lock.unlock();
            const auto seq = frame_seq(reply);
            for (std::size_t i = 0; i < requests.size(); ++i) {
                if (requests[i].party != party || answered[i] || !seq || seqs[i] != seq) {
                    continue;
                }
                answered[i] = true;
                --outstanding;
                if (on_reply(i, reply)) {
                    return;
                }
                break;
            }
        }
    }

    void broadcast(const frame &message) override {
        for (auto &c : m_conns) {
            ++m_meter.messages_sent;
            m_meter.bytes_sent += 5 + message.body.size();
            write_frame(c.fd, message);
        }
    }

private:
    void read_loop(std::size_t party) {
        // Malformed frames end the connection; the party then simply times out.
        while (auto f = read_frame(m_conns[party].fd)) {
            std::lock_guard lock{m_mutex};
            m_queue.emplace_back(party, std::move(*f));
            m_cv.notify_one();
        }
    }

    std::vector<connection> &m_conns;
    effort_meter &m_meter;
    int m_timeout;
    std::vector<std::thread> m_readers;
    std::mutex m_mutex;
    std::condition_variable m_cv;
    std::deque<std::pair<std::size_t, frame>> m_queue;
};

} // namespace

serve_report serve(const serve_options &options, const scenario &settings,
                   const std::function<void(std::uint16_t)> &on_listening) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) {
        fail("socket");
    }
    int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(options.port);
    if (::inet_pton(AF_INET, options.host.c_str(), &addr.sin_addr) != 1) {
        ::close(listener);
        throw std::runtime_error{"invalid listen address " + options.host};
    }
    if (::bind(listener, reinterpret_cast<sockaddr *>(&addr), sizeof addr) < 0 || ::listen(listener, 128) < 0) {
        const auto saved = errno;
        ::close(listener);
        errno = saved;
        fail("bind/listen " + options.host + ":" + std::to_string(options.port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listener, reinterpret_cast<sockaddr *>(&addr), &len);
    if (on_listening) {
        on_listening(ntohs(addr.sin_port));
    }

    std::vector<connection> conns;
    const auto window_end = clock::now() + std::chrono::milliseconds{options.registration_ms};
    while (options.expected_parties == 0 || conns.size() < options.expected_parties) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(window_end - clock::now()).count();
        if (left <= 0 || wait_readable(listener, static_cast<int>(left)) <= 0) {
            break;
        }
        const int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0) {
            continue;
        }
        set_nodelay(fd);
        std::optional<register_message> reg;
        if (wait_readable(fd, options.timeout_ms) > 0) {
            if (auto f = read_frame(fd)) {
                reg = decode_register(*f);
            }
        }
        const bool taken = reg && std::any_of(conns.begin(), conns.end(), [&](const connection &c) { return c.name == reg->name; });
        if (!reg || taken) {
            ::close(fd);
            continue;
        }
        conns.push_back({fd, reg->name, reg->strategy});
    }
    ::close(listener);
    std::sort(conns.begin(), conns.end(), [](const connection &a, const connection &b) { return a.name < b.name; });

    serve_report report;
    for (const auto &c : conns) {
        report.names.push_back(c.name);
        report.strategies.push_back(c.strategy);
    }
    hash m0;
    {
        const effort_scope scope{&report.referee_effort};
        m0 = state_hash(settings.initial);
    }
    socket_network net{conns, report.referee_effort, options.timeout_ms};
    if (conns.empty() || (settings.mode == run_mode::two_party && conns.size() < 2)) {
        report.log.add({{"event", "result"}, {"outcome", to_string(outcome::no_claim)}, {"winners", nlohmann::json::array()},
                        {"final_hash", ""}, {"rounds", 0}, {"matches", 0}});
        net.broadcast(encode(verdict_message{to_string(outcome::no_claim), {}, {}}));
        report.result.kind = outcome::no_claim;
        return report;
    }
    referee ref{net, {m0, settings.max_steps, report.names}, &report.log, &report.referee_effort};
    report.result = run_protocol(ref, settings);
    return report;
}

std::optional<client_report> run_client(const std::string &host, std::uint16_t port, const std::string &name,
                                        const strategy &plan, const machine_state &initial, std::uint64_t max_steps) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
        throw std::runtime_error{"cannot resolve " + host};
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        fail("socket");
    }
    if (::connect(fd, res->ai_addr, res->ai_addrlen) < 0) {
        const auto saved = errno;
        ::freeaddrinfo(res);
        ::close(fd);
        errno = saved;
        fail("connect " + host + ":" + std::to_string(port));
    }
    ::freeaddrinfo(res);
    set_nodelay(fd);

    client_report report;
    const effort_scope scope{&report.effort};
    player_engine engine{plan, initial, max_steps};
    std::optional<client_report> out;
    if (write_frame(fd, encode(register_message{name, to_string(plan)}))) {
        while (auto f = read_frame(fd)) {
            if (auto v = decode_verdict(*f)) {
                report.verdict = std::move(*v);
                out = report;
                break;
            }
            if (auto reply = engine.answer(*f)) {
                ++report.effort.messages_sent;
                report.effort.bytes_sent += 5 + reply->body.size();
                if (!write_frame(fd, *reply)) {
                    break;
                }
            }
        }
    }
    ::close(fd);
    return out;
}

} // namespace prt
