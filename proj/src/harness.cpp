#include "prt/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "prt/assembler.hpp"
#include "prt/merkle.hpp"

namespace prt {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char *to_string(run_mode m) noexcept {
    switch (m) {
        case run_mode::two_party:
            return "two-party";
        case run_mode::linear:
            return "linear";
        case run_mode::tournament:
            return "tournament";
        case run_mode::multistage:
            return "multistage";
    }
    return "unknown";
}

run_mode parse_mode(std::string_view text) {
    for (auto m : {run_mode::two_party, run_mode::linear, run_mode::tournament, run_mode::multistage}) {
        if (text == to_string(m)) {
            return m;
        }
    }
    throw std::invalid_argument{"unknown mode '" + std::string{text} + "'"};
}

stage_config scenario::stages() const {
    if (mode == run_mode::multistage) {
        return {strides, max_steps};
    }
    return stage_config::dense(max_steps);
}

std::string party_name(std::size_t index, const strategy &plan) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu-", index);
    return buf + std::string{to_string(plan.kind)};
}

void add_parties(scenario &s, const strategy &plan, std::size_t count, std::uint64_t step_stride) {
    for (std::size_t i = 0; i < count; ++i) {
        strategy p = plan;
        p.step += i * step_stride;
        s.parties.push_back({party_name(s.parties.size(), p), p});
    }
}

namespace {

strategy strategy_from_json(const json &j) {
    std::string text = j.at("strategy").get<std::string>();
    std::string params;
    for (const char *key : {"step", "address", "value", "instruction", "mutation", "phase", "stage"}) {
        if (!j.contains(key)) {
            continue;
        }
        const auto &v = j.at(key);
        params += (params.empty() ? "" : ",") + std::string{key} + "=" +
            (v.is_string() ? v.get<std::string>() : std::to_string(v.get<std::uint64_t>()));
    }
    if (!params.empty()) {
        text += (text.find(':') == std::string::npos ? ":" : ",") + params;
    }
    return parse_strategy(text);
}

} // namespace

scenario parse_scenario(const json &j, const std::filesystem::path &base) {
    scenario s;
    try {
        s.name = j.value("name", "scenario");
        if (j.contains("source")) {
            s.program = "<inline>";
            s.initial = assemble(j.at("source").get<std::string>());
        } else {
            std::filesystem::path p = j.at("program").get<std::string>();
            if (p.is_relative() && !base.empty() && !std::filesystem::exists(p)) {
                p = base / p;
            }
            s.program = p.string();
            s.initial = assemble_file(p.string());
        }
        s.max_steps = j.value("max_steps", s.max_steps);
        if (j.contains("mode")) {
            s.mode = parse_mode(j.at("mode").get<std::string>());
        }
        if (j.contains("stages")) {
            s.strides = j.at("stages").get<std::vector<unsigned>>();
        }
        s.seed = j.value("seed", s.seed);
        s.timeout_ticks = j.value("timeout_ticks", s.timeout_ticks);
        s.max_latency = j.value("max_latency", s.max_latency);
        s.tick_limit = j.value("tick_limit", s.tick_limit);
        s.expect = j.value("expect", s.expect);
        for (const auto &p : j.at("parties")) {
            add_parties(s, strategy_from_json(p), p.value("count", std::size_t{1}), p.value("step_stride", std::uint64_t{0}));
        }
    } catch (const json::exception &e) {
        throw scenario_error{std::string{"scenario: "} + e.what()};
    } catch (const std::invalid_argument &e) {
        throw scenario_error{std::string{"scenario: "} + e.what()};
    } catch (const assembly_error &e) {
        throw scenario_error{"scenario program: " + std::string{e.what()}};
    }
    if (s.parties.empty()) {
        throw scenario_error{"scenario: no parties"};
    }
    if (s.max_latency == 0 || s.timeout_ticks == 0) {
        throw scenario_error{"scenario: latency and timeout must be positive"};
    }
    try {
        s.stages().validate();
    } catch (const std::invalid_argument &e) {
        throw scenario_error{std::string{"scenario: "} + e.what()};
    }
    return s;
}

scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in{path};
    if (!in) {
        throw scenario_error{"cannot open scenario " + path.string()};
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &e) {
        throw scenario_error{"scenario " + path.string() + ": " + e.what()};
    }
    return parse_scenario(j, path.parent_path());
}

sim_network::sim_network(std::vector<player> &players, std::vector<effort_meter> &meters, effort_meter &referee_meter,
                         std::uint64_t seed, std::uint64_t timeout_ticks, std::uint64_t max_latency,
                         std::uint64_t tick_limit) :
    m_players{players},
    m_meters{meters},
    m_referee{referee_meter},
    m_rng{seed},
    m_timeout{timeout_ticks},
    m_max_latency{max_latency},
    m_tick_limit{tick_limit} {}

void sim_network::advance(std::uint64_t tick) {
    m_now = std::max(m_now, tick);
    if (m_now > m_tick_limit) {
        throw tick_limit_exceeded{m_tick_limit};
    }
}

void sim_network::exchange(std::span<const outbound> requests, const reply_handler &on_reply) {
    struct arrival {
        std::uint64_t tick;
        std::size_t request;
        frame reply;
    };
    std::vector<arrival> arrivals;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto &q = requests[i];
        ++m_referee.messages_sent;
        m_referee.bytes_sent += 5 + q.message.body.size();
        std::optional<frame> reply;
        {
            const effort_scope scope{&m_meters[q.party]};
            reply = m_players[q.party].answer(q.message);
        }
        if (!reply) {
            continue;
        }
        ++m_meters[q.party].messages_sent;
        m_meters[q.party].bytes_sent += 5 + reply->body.size();
        const std::uint64_t latency = 1 + m_rng() % m_max_latency;
        if (latency <= m_timeout) {
            arrivals.push_back({m_now + latency, i, std::move(*reply)});
        }
    }
    std::stable_sort(arrivals.begin(), arrivals.end(), [](const arrival &a, const arrival &b) { return a.tick < b.tick; });
    const std::uint64_t deadline = m_now + m_timeout;
    for (const auto &a : arrivals) {
        advance(a.tick);
        if (frame_seq(a.reply) != frame_seq(requests[a.request].message)) {
            continue;
        }
        if (on_reply(a.request, a.reply)) {
            return;
        }
    }
    // Anyone silent is waited for until the deadline.
    advance(arrivals.size() == requests.size() && !arrivals.empty() ? arrivals.back().tick : deadline);
}

void sim_network::broadcast(const frame &message) {
    m_referee.messages_sent += m_players.size();
    m_referee.bytes_sent += m_players.size() * (5 + message.body.size());
}

dispute_result run_protocol(referee &r, const scenario &s) {
    switch (s.mode) {
        case run_mode::two_party:
            return r.two_party();
        case run_mode::linear:
            return r.linear();
        case run_mode::tournament:
        case run_mode::multistage:
            return r.tournament(s.stages());
    }
    throw std::logic_error{"unhandled mode"};
}

run_report simulate(const scenario &s) {
    run_report report;
    player_factory factory{s.initial, s.max_steps};
    std::vector<player> players;
    for (const auto &p : s.parties) {
        report.names.push_back(p.name);
        players.push_back(factory.make(p.name, p.plan));
    }
    std::vector<effort_meter> meters(players.size());
    effort_meter referee_meter;
    sim_network net{players, meters, referee_meter, s.seed, s.timeout_ticks, s.max_latency, s.tick_limit};
    hash m0;
    {
        const effort_scope scope{&referee_meter};
        m0 = state_hash(s.initial);
    }
    referee ref{net, {m0, s.max_steps, report.names}, &report.log, &referee_meter};
    report.result = run_protocol(ref, s);
    report.ticks = net.now();
    report.effort["referee"] = referee_meter;
    for (std::size_t i = 0; i < players.size(); ++i) {
        meters[i].matches = report.result.matches_played[i];
        report.effort[report.names[i]] = meters[i];
    }
    return report;
}

hash honest_final_hash(const machine_state &initial, std::uint64_t max_steps) {
    const effort_scope unmetered{nullptr};
    return state_hash(run(initial, max_steps).state);
}

expectation_check check_expectation(const scenario &s, const std::vector<std::string> &names,
                                    const dispute_result &result, bool verify_final) {
    std::set<std::string> winners;
    for (auto w : result.winners) {
        winners.insert(names[w]);
    }
    if (s.expect == "no_claim") {
        return {result.kind == outcome::no_claim, std::string{"outcome "} + to_string(result.kind)};
    }
    if (s.expect == "no_dispute") {
        return {result.kind == outcome::no_dispute, std::string{"outcome "} + to_string(result.kind)};
    }
    const bool final_ok =
        !verify_final || (result.final_hash && *result.final_hash == honest_final_hash(s.initial, s.max_steps));
    if (s.expect.rfind("winner:", 0) == 0) {
        const auto who = s.expect.substr(7);
        const bool ok = winners.contains(who);
        return {ok, ok ? who + " won" : who + " did not win"};
    }
    if (s.expect != "honest") {
        return {false, "unknown expectation '" + s.expect + "'"};
    }
    bool honest_won = false;
    bool any_honest = false;
    for (const auto &p : s.parties) {
        if (p.plan.kind == strategy_kind::honest) {
            any_honest = true;
            honest_won |= winners.contains(p.name);
        }
    }
    if (!any_honest) {
        return {false, "scenario has no honest party"};
    }
    if (!honest_won) {
        return {false, "honest party lost"};
    }
    if (!final_ok) {
        return {false, "final hash differs from the honest re-execution"};
    }
    return {true, "honest party won with the correct final hash"};
}

ojson effort_json(const effort_table &effort) {
    ojson out = ojson::object();
    for (const auto &[who, m] : effort) {
        out[who] = {{"hashes", m.hashes},
                    {"commitment_hashes", m.commitment_hashes},
                    {"dispute_hashes", m.dispute_hashes()},
                    {"state_hashes", m.state_hashes},
                    {"steps", m.steps},
                    {"messages_sent", m.messages_sent},
                    {"bytes_sent", m.bytes_sent},
                    {"matches", m.matches},
                    {"rounds", m.rounds}};
    }
    return out;
}

ojson report_json(const scenario &s, const run_report &report, const expectation_check &check) {
    ojson winners = ojson::array();
    for (auto w : report.result.winners) {
        winners.push_back(report.names[w]);
    }
    ojson matches = ojson::array();
    for (const auto &m : report.result.matches) {
        ojson e{{"id", m.id}, {"stage", m.stage}, {"round", m.round}, {"start", m.start},
                {"winner", m.winner}, {"leaf", m.leaf}, {"referee_hashes", m.referee_hashes}, {"nested", m.nested}};
        if (m.step) {
            e["step"] = *m.step;
        }
        matches.push_back(std::move(e));
    }
    return {{"scenario", s.name},
            {"program", s.program},
            {"mode", to_string(s.mode)},
            {"max_steps", s.max_steps},
            {"parties", s.parties.size()},
            {"seed", s.seed},
            {"outcome", to_string(report.result.kind)},
            {"winners", std::move(winners)},
            {"final_hash", report.result.final_hash ? to_hex(*report.result.final_hash) : ""},
            {"rounds", report.result.rounds},
            {"ticks", report.ticks},
            {"pass", check.passed},
            {"detail", check.detail},
            {"matches", std::move(matches)},
            {"effort", effort_json(report.effort)}};
}

} // namespace prt
