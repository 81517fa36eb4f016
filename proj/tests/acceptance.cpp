// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "prt/bench.hpp"
#include "prt/net.hpp"
#include "scenario_support.hpp"

using namespace prt;

namespace {

struct verdict {
    bool pass = false;
    std::string detail;
};

const machine_state &program(const std::string &name) {
    static std::map<std::string, machine_state> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        it = cache.emplace(name, assemble_file(test::program_path(name))).first;
    }
    return it->second;
}

scenario base(const std::string &prog, std::uint64_t t, run_mode mode) {
    scenario s;
    s.name = prog;
    s.program = test::program_path(prog);
    s.initial = program(prog);
    s.max_steps = t;
    s.mode = mode;
    return s;
}

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::set<std::string> winner_set(const std::vector<std::string> &names, const std::vector<std::size_t> &winners) {
    std::set<std::string> out;
    for (auto w : winners) {
        out.insert(names[w]);
    }
    return out;
}

std::size_t count_events(const transcript &log, const std::string &kind) {
    std::size_t n = 0;
    for (const auto &line : log.lines()) {
        n += nlohmann::json::parse(line).at("event") == kind;
    }
    return n;
}

// ---------------------------------------------------------------------------
// 1. honest-victory matrix

// Dishonest parties cycle through this many distinct variants of a family;
// beyond that they are Sybil clones sharing an engine.
constexpr std::size_t variants_per_family = 32;

strategy family_member(const std::string &family, std::size_t i, std::uint64_t t) {
    const std::size_t v = i % variants_per_family;
    const std::uint64_t step = 1 + (v * 977 + 131) % (t - 1);
    strategy s;
    s.step = step;
    if (family == "corrupt_state") {
        s.kind = strategy_kind::corrupt_state;
    } else if (family == "corrupt_instruction") {
        s.kind = strategy_kind::corrupt_instruction;
    } else if (family.starts_with("forge_log/")) {
        s = parse_strategy("forge_log:step=" + std::to_string(step) + ",mutation=" + family.substr(10));
    } else if (family == "stall") {
        static constexpr stall_phase phases[] = {stall_phase::commit, stall_phase::bisect, stall_phase::reveal,
                                                 stall_phase::log, stall_phase::inner};
        s.kind = strategy_kind::stall;
        s.phase = phases[v % 5];
    } else if (family == "defect") {
        s.kind = strategy_kind::defect;
        s.step = 0;
        s.stage = static_cast<unsigned>(1 + v % 3);
    }
    return s;
}

verdict criterion_1() {
    const std::vector<std::string> families{"corrupt_state",         "corrupt_instruction",   "forge_log/value_flip",
                                            "forge_log/address_swap", "forge_log/sibling_flip", "forge_log/entry_drop",
                                            "forge_log/entry_dup",    "stall",                 "defect"};
    const std::vector<std::size_t> sizes{2, 9, 33, 129, 301};
    const std::vector<run_mode> modes{run_mode::linear, run_mode::tournament, run_mode::multistage};
    const std::uint64_t t = 1 << 12;
    const auto truth = honest_final_hash(program("checksum.asm"), t);
    std::size_t runs = 0;
    std::vector<std::string> failures;
    const auto began = std::chrono::steady_clock::now();
    for (const auto &family : families) {
        for (auto p : sizes) {
            for (auto mode : modes) {
                auto s = base("checksum.asm", t, mode);
                const std::size_t honest_at = (p - 1) / 2;
                for (std::size_t i = 0, d = 0; i < p; ++i) {
                    add_parties(s, i == honest_at ? strategy{} : family_member(family, d++, t));
                }
                ++runs;
                const auto r = simulate(s);
                const auto check = check_expectation(s, r.names, r.result);
                const bool ok = check.passed && r.result.final_hash == truth &&
                    std::find(r.result.winners.begin(), r.result.winners.end(), honest_at) != r.result.winners.end();
                if (!ok) {
                    failures.push_back(fmt("%s p=%zu %s: %s", family.c_str(), p, to_string(mode), check.detail.c_str()));
                }
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count();
    if (!failures.empty()) {
        return {false, fmt("%zu/%zu runs failed, first: %s", failures.size(), runs, failures[0].c_str())};
    }
    return {secs < 600, fmt("%zu runs (9 families x 5 party counts x 3 modes, t=2^12), honest won every one, %.1f s", runs, secs)};
}

// ---------------------------------------------------------------------------
// 2. bracket rounds

verdict criterion_2() {
    auto s = base("fib.asm", 256, run_mode::tournament);
    add_parties(s, {});
    for (std::size_t i = 1; i <= 300; ++i) {
        strategy c;
        c.kind = strategy_kind::corrupt_state;
        c.step = 1 + i % 255;
        c.value = 1000 + i;
        add_parties(s, c);
    }
    const auto r = simulate(s);
    const auto teams = count_events(r.log, "team");
    std::string detail = fmt("301 parties -> %zu teams, %u rounds", teams, r.result.rounds);
    bool pass = teams == 301 && r.result.rounds == 9 && check_expectation(s, r.names, r.result).passed;
    for (unsigned k = 1; k <= 6; ++k) {
        auto b = base("fib.asm", 256, run_mode::tournament);
        add_parties(b, {});
        for (std::size_t i = 1; i < (std::size_t{1} << k); ++i) {
            add_parties(b, parse_strategy("corrupt_state:step=" + std::to_string(3 * i)));
        }
        const auto rb = simulate(b);
        pass = pass && rb.result.rounds == k && check_expectation(b, rb.names, rb.result).passed;
        detail += fmt("; 2^%u teams -> %u", k, rb.result.rounds);
    }
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// 3. step-hash matches the oracle interpreter at every step

verdict criterion_3() {
    const std::vector<std::pair<std::string, std::uint64_t>> runs{
        {"sum.asm", 64}, {"fib.asm", 256}, {"addi.asm", 256}, {"checksum.asm", 4096}};
    std::uint64_t steps = 0;
    std::uint64_t mismatches = 0;
    for (const auto &[name, t] : runs) {
        machine_state state = program(name);
        auto tree = state_tree(state);
        oracle::interpreter ref{test::words_of(state)};
        for (std::uint64_t i = 0; i < t; ++i) {
            const hash m = tree.root();
            mismatches += m != test::to_prt(oracle::words_root(ref.mem));
            const auto log = step_with_log(state, tree);
            ref.step();
            const auto out = step_hash(m, log);
            mismatches += !out.accepted() || *out.root != test::to_prt(oracle::words_root(ref.mem));
            ++steps;
        }
    }
    return {mismatches == 0 && steps >= 4096, fmt("%llu steps over 4 programs, %llu mismatches", (unsigned long long)steps,
                                                  (unsigned long long)mismatches)};
}

// ---------------------------------------------------------------------------
// 4. single-field log mutations are rejected or harmless

verdict criterion_4() {
    std::mt19937_64 rng{2024};
    std::uint64_t rejected = 0;
    std::uint64_t harmless = 0;
    std::uint64_t divergent = 0;
    for (const auto &[name, t] : std::vector<std::pair<std::string, std::uint64_t>>{
             {"sum.asm", 40}, {"fib.asm", 185}, {"addi.asm", 248}, {"checksum.asm", 4096}}) {
        std::vector<std::pair<hash, access_log>> logs;
        machine_state state = program(name);
        auto tree = state_tree(state);
        for (std::uint64_t i = 0; i < t; ++i) {
            const hash m = tree.root();
            logs.emplace_back(m, step_with_log(state, tree));
        }
        for (int k = 0; k < 1000; ++k) {
            const auto &[m, genuine] = logs[rng() % logs.size()];
            const hash honest_out = *step_hash(m, genuine).root;
            auto bent = genuine;
            auto &e = bent.entries[rng() % bent.entries.size()];
            switch (rng() % 5) {
                case 0:
                    e.type = e.type == access_type::read ? access_type::write : access_type::read;
                    break;
                case 1:
                    e.address ^= std::uint64_t{1} << (rng() % 6);
                    break;
                case 2:
                    e.prior ^= std::uint64_t{1} << (rng() % 64);
                    break;
                case 3:
                    if (!e.siblings.empty()) {
                        e.siblings[rng() % e.siblings.size()][rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255);
                    }
                    break;
                case 4:
                    e.written = rng();
                    break;
            }
            const auto out = step_hash(m, bent);
            if (!out.accepted()) {
                ++rejected;
            } else if (*out.root == honest_out) {
                ++harmless;
            } else {
                ++divergent;
            }
        }
    }
    return {divergent == 0, fmt("4000 mutations: %llu rejected, %llu same root, %llu divergent", (unsigned long long)rejected,
                                (unsigned long long)harmless, (unsigned long long)divergent)};
}

// ---------------------------------------------------------------------------
// 5. bisection lands on the first divergent leaf

verdict criterion_5() {
    const std::uint64_t t = 1 << 12;
    const auto &initial = program("checksum.asm");
    // Honest word vectors for every step, from the oracle interpreter.
    std::vector<std::vector<std::uint64_t>> honest_words;
    {
        oracle::interpreter ref{test::words_of(initial)};
        for (std::uint64_t i = 0; i <= t; ++i) {
            honest_words.push_back(ref.mem);
            ref.step();
        }
    }
    player_factory factory{initial, t};
    auto honest = factory.make("000-honest", {});
    std::mt19937_64 rng{55};
    std::size_t exact = 0;
    std::string first_miss;
    for (int k = 0; k < 100; ++k) {
        const std::uint64_t j = 1 + rng() % (t - 1);
        strategy c;
        c.kind = strategy_kind::corrupt_state;
        c.step = j;
        c.value = rng();
        // Oracle: first step at which the corrupted run's words differ from the honest run's.
        std::uint64_t expect = t + 1;
        {
            oracle::interpreter bent{honest_words[j]};
            bent.mem.back() = *c.value;
            for (std::uint64_t i = j; i <= t; ++i) {
                if (bent.mem != honest_words[i]) {
                    expect = i;
                    break;
                }
                bent.step();
            }
        }
        std::vector<player> players{honest, player{"001-corrupt", std::make_shared<player_engine>(c, initial, t)}};
        std::vector<effort_meter> meters(2);
        effort_meter ref_meter;
        sim_network net{players, meters, ref_meter, 1, 64, 1, 1'000'000'000};
        referee ref{net, {state_hash(initial), t, {"000-honest", "001-corrupt"}}, nullptr, &ref_meter};
        const auto r = ref.tournament(stage_config::dense(t));
        const bool ok = r.matches.size() == 1 && r.matches[0].leaf == expect && r.matches[0].step == expect - 1 &&
            r.winners == std::vector<std::size_t>{0};
        exact += ok;
        if (!ok && first_miss.empty()) {
            first_miss = fmt("; j=%llu expected leaf %llu got %llu", (unsigned long long)j, (unsigned long long)expect,
                             r.matches.empty() ? 0ull : (unsigned long long)r.matches[0].leaf);
        }
    }
    return {exact == 100, fmt("%zu/100 matches adjudicated the first divergent leaf", exact) + first_miss};
}

// ---------------------------------------------------------------------------
// 6. honest effort grows with log p in the tournament, with p in the linear protocol

verdict criterion_6() {
    const std::uint64_t t = 1 << 10;
    const auto &initial = program("checksum.asm");
    const std::string prog = test::program_path("checksum.asm");
    std::vector<double> logp, dispute;
    std::map<std::size_t, bench_point> tour;
    for (std::size_t p : {2, 8, 32, 128, 512}) {
        auto b = run_bench_point(bench_scenario(initial, prog, run_mode::tournament, p, t, {}, 1));
        if (!b.honest_won) {
            return {false, fmt("honest lost the tournament at p=%zu", p)};
        }
        logp.push_back(std::ceil(std::log2(static_cast<double>(p))));
        dispute.push_back(static_cast<double>(b.honest.dispute_hashes()));
        tour[p] = b;
    }
    const auto fit = fit_line(logp, dispute);
    std::map<std::size_t, bench_point> lin;
    for (std::size_t p : {8, 32}) {
        lin[p] = run_bench_point(bench_scenario(initial, prog, run_mode::linear, p, t, {}, 1));
        if (!lin[p].honest_won) {
            return {false, fmt("honest lost the linear run at p=%zu", p)};
        }
    }
    const double lin_growth = static_cast<double>(lin[32].honest.hashes) / static_cast<double>(lin[8].honest.hashes);
    const double tour_growth = static_cast<double>(tour[32].honest.hashes) / static_cast<double>(tour[8].honest.hashes);
    std::string series;
    for (std::size_t i = 0; i < dispute.size(); ++i) {
        series += fmt("%s%.0f", i ? "," : "", dispute[i]);
    }
    const bool pass = fit.max_relative_residual < 0.25 && fit.slope > 0 && lin_growth >= 4.0 && tour_growth <= 1.6;
    return {pass, fmt("dispute hashes [%s] ~ %.1f + %.1f*ceil(log2 p), max residual %.1f%%; p 8->32: linear x%.2f, "
                      "tournament x%.3f",
                      series.c_str(), fit.intercept, fit.slope, 100 * fit.max_relative_residual, lin_growth, tour_growth)};
}

// ---------------------------------------------------------------------------
// 7. referee cost per match grows additively per doubling of t

verdict criterion_7() {
    // Matches are grouped by how many access logs the referee replayed: it
    // stops at the first valid log, so whether the loser's log is checked
    // first depends on root order and shifts the count by one replay.
    std::map<std::size_t, std::vector<double>> groups;
    std::map<std::size_t, std::vector<std::size_t>> seen;
    const std::vector<unsigned> sizes{10, 12, 14};
    for (std::size_t ki = 0; ki < sizes.size(); ++ki) {
        const std::uint64_t t = std::uint64_t{1} << sizes[ki];
        std::map<std::size_t, std::pair<double, std::size_t>> acc;
        // The checksum loop has period 8 after a 5-step prologue; corrupting at
        // 8m + 9 always adjudicates the same STORE, so only the depth varies with t.
        for (std::uint64_t q = 1; q <= 8; ++q) {
            auto s = base("checksum.asm", t, run_mode::tournament);
            add_parties(s, {});
            add_parties(s, parse_strategy("corrupt_state:step=" + std::to_string(8 * (q * t / 72) + 9)));
            const auto r = simulate(s);
            std::map<unsigned, std::size_t> replays;
            for (const auto &line : r.log.lines()) {
                const auto j = nlohmann::json::parse(line);
                if (j.at("event") == "log") {
                    ++replays[j.at("match").get<unsigned>()];
                }
            }
            for (const auto &m : r.result.matches) {
                auto &[sum, n] = acc[replays[m.id]];
                sum += static_cast<double>(m.referee_hashes);
                ++n;
            }
        }
        for (const auto &[replayed, sn] : acc) {
            groups[replayed].resize(sizes.size(), -1);
            groups[replayed][ki] = sn.first / static_cast<double>(sn.second);
        }
    }
    bool pass = false;
    std::string detail;
    for (const auto &[replayed, f] : groups) {
        if (std::find(f.begin(), f.end(), -1.0) != f.end()) {
            continue;
        }
        const double d1 = f[1] - f[0];
        const double d2 = f[2] - f[1];
        const bool ok = d1 > 0 && std::abs(d2 - d1) <= 0.25 * d1;
        pass = (detail.empty() || pass) && ok;
        detail += fmt("%s%zu log(s) replayed: %.1f, %.1f, %.1f hashes at t=2^10,2^12,2^14 (+%.1f, +%.1f)",
                      detail.empty() ? "" : "; ", replayed, f[0], f[1], f[2], d1, d2);
    }
    return {pass, detail.empty() ? "no match shape observed at all three sizes" : detail};
}

// ---------------------------------------------------------------------------
// 8. multistage and dense tournaments agree

verdict criterion_8() {
    const std::uint64_t t = 1 << 12;
    std::size_t agree = 0;
    std::string first_diff;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng{seed};
        auto dense = base("checksum.asm", t, run_mode::tournament);
        dense.seed = seed;
        dense.max_latency = 1 + rng() % 4;
        const std::size_t p = 2 + rng() % 7;
        const std::size_t honest_at = rng() % p;
        for (std::size_t i = 0; i < p; ++i) {
            if (i == honest_at) {
                add_parties(dense, {});
                continue;
            }
            const std::uint64_t step = 1 + rng() % (t - 1);
            static const char *kinds[] = {"corrupt_state", "corrupt_instruction", "forge_log", "stall", "honest"};
            static const char *forges[] = {"value_flip", "address_swap", "sibling_flip", "entry_drop", "entry_dup"};
            static const char *phases[] = {"commit", "bisect", "reveal", "log"};
            std::string text = kinds[rng() % 5];
            if (text == "forge_log") {
                text += std::string{":mutation="} + forges[rng() % 5] + ",step=" + std::to_string(step);
            } else if (text == "stall") {
                text += std::string{":phase="} + phases[rng() % 4] + ",step=" + std::to_string(rng() % 2 ? step : 0);
            } else if (text != "honest") {
                text += ":step=" + std::to_string(step);
            }
            add_parties(dense, parse_strategy(text));
        }
        auto multi = dense;
        multi.mode = run_mode::multistage;
        multi.strides = {10, 5, 0};
        const auto rd = simulate(dense);
        const auto rm = simulate(multi);
        const bool same = rd.result.kind == rm.result.kind && rd.result.final_hash == rm.result.final_hash &&
            winner_set(rd.names, rd.result.winners) == winner_set(rm.names, rm.result.winners) &&
            check_expectation(dense, rd.names, rd.result).passed;
        agree += same;
        if (!same && first_diff.empty()) {
            first_diff = fmt("; seed %llu differs", (unsigned long long)seed);
        }
    }
    return {agree == 20, fmt("%zu/20 seeded scenarios: same winners and final hash (stages 10,5,0 vs dense)", agree) + first_diff};
}

// ---------------------------------------------------------------------------
// 9. sparse stage-1 commitment is far cheaper than a dense one

verdict criterion_9() {
    const std::uint64_t t = 1 << 15;
    const auto &initial = program("checksum.asm");
    effort_meter dense, sparse;
    {
        const effort_scope scope{&dense};
        (void)build_commitment(initial, 0, t, 0);
    }
    {
        const effort_scope scope{&sparse};
        (void)build_commitment(initial, 0, t, 10);
    }
    const double ratio = static_cast<double>(dense.hashes) / static_cast<double>(sparse.hashes);
    // Sparse cost bound: (t/2^10 + 1) state hashes plus the padded leaf tree.
    const std::uint64_t words = initial.size();
    const std::uint64_t bound = ((t >> 10) + 1) * (2 * words - 1) + 2 * (t >> 10);
    const bool pass = ratio >= 500 && sparse.hashes <= bound;
    return {pass, fmt("t=2^15: dense %llu hashes (%llu state hashes), g=10 %llu hashes (%llu state hashes), ratio %.0f",
                      (unsigned long long)dense.hashes, (unsigned long long)dense.state_hashes,
                      (unsigned long long)sparse.hashes, (unsigned long long)sparse.state_hashes, ratio)};
}

// ---------------------------------------------------------------------------
// 10. determinism and socket/simulator agreement

struct socket_outcome {
    outcome kind;
    std::optional<hash> final_hash;
    std::set<std::string> winners;
};

socket_outcome over_loopback(const scenario &s) {
    std::promise<std::uint16_t> bound;
    auto port_ready = bound.get_future();
    auto server = std::async(std::launch::async, [&] {
        return serve({"127.0.0.1", 0, 10000, s.parties.size(), 400}, s, [&](std::uint16_t p) { bound.set_value(p); });
    });
    const auto port = port_ready.get();
    std::vector<std::future<std::optional<client_report>>> clients;
    for (const auto &p : s.parties) {
        clients.push_back(std::async(std::launch::async, [&s, &p, port] {
            return run_client("127.0.0.1", port, p.name, p.plan, s.initial, s.max_steps);
        }));
    }
    const auto report = server.get();
    for (auto &c : clients) {
        c.get();
    }
    return {report.result.kind, report.result.final_hash, winner_set(report.names, report.result.winners)};
}

verdict criterion_10() {
    std::vector<scenario> refs;
    for (const char *f : {"two_party.json", "linear.json", "addi.json", "tournament.json", "multistage.json"}) {
        refs.push_back(load_scenario(std::string{PRT_SCENARIO_DIR} + "/" + f));
    }
    std::size_t identical = 0;
    std::size_t agree = 0;
    std::string problem;
    for (auto s : refs) {
        s.max_latency = std::max<std::uint64_t>(s.max_latency, 3);
        const auto a = simulate(s);
        const auto b = simulate(s);
        identical += a.log.text() == b.log.text();
        const auto net = over_loopback(s);
        const bool same = net.kind == a.result.kind && net.final_hash == a.result.final_hash &&
            net.winners == winner_set(a.names, a.result.winners);
        agree += same;
        if (!same && problem.empty()) {
            problem = "; socket run of '" + s.name + "' disagrees";
        }
    }
    return {identical == refs.size() && agree == refs.size(),
            fmt("%zu/5 scenarios replay byte-identically, %zu/5 match over loopback", identical, agree) + problem};
}

} // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<std::string, std::function<verdict()>>> criteria{
        {"honest-victory matrix", criterion_1},
        {"bracket round count", criterion_2},
        {"step-hash oracle equivalence", criterion_3},
        {"step-hash soundness", criterion_4},
        {"bisection exactness", criterion_5},
        {"log-effort scaling", criterion_6},
        {"referee efficiency", criterion_7},
        {"multistage equivalence", criterion_8},
        {"commitment cost reduction", criterion_9},
        {"determinism and socket agreement", criterion_10},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        if (!only.empty() && !only.contains(n)) {
            continue;
        }
        const auto began = std::chrono::steady_clock::now();
        verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception &e) {
            v = {false, std::string{"exception: "} + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count();
        std::printf("%s %2d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", n, criteria[i].first.c_str(), v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
