#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "prt/assembler.hpp"
#include "prt/bench.hpp"
#include "prt/harness.hpp"
#include "prt/net.hpp"

using namespace prt;

namespace {

std::vector<unsigned> parse_strides(const std::string &text) {
    std::vector<unsigned> out;
    std::stringstream in{text};
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(static_cast<unsigned>(std::stoul(item)));
    }
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string &text) {
    std::vector<T> out;
    std::stringstream in{text};
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(static_cast<T>(std::stoull(item)));
    }
    return out;
}

struct run_options {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> stages;
    std::optional<std::uint64_t> timeout_ticks;
    bool verify = false;
    std::string transcript_path;
    std::string metrics_path;
};

void apply_overrides(scenario &s, const run_options &o) {
    if (o.seed) {
        s.seed = *o.seed;
    }
    if (o.mode) {
        s.mode = parse_mode(*o.mode);
    }
    if (o.stages) {
        s.strides = parse_strides(*o.stages);
        if (!o.mode && s.strides.size() > 1) {
            s.mode = run_mode::multistage;
        }
    }
    if (o.timeout_ticks) {
        s.timeout_ticks = *o.timeout_ticks;
    }
    s.stages().validate();
}

int cmd_run(const run_options &o) {
    scenario s = load_scenario(o.scenario_path);
    apply_overrides(s, o);
    run_report report;
    try {
        report = simulate(s);
    } catch (const tick_limit_exceeded &e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    auto check = check_expectation(s, report.names, report.result, o.verify);
    if (o.verify) {
        for (const auto &problem : verify_transcript(report.log.lines())) {
            check.passed = false;
            check.detail += "; transcript: " + problem;
        }
    }
    if (!o.transcript_path.empty()) {
        std::ofstream out{o.transcript_path};
        report.log.write(out);
    }
    const auto summary = report_json(s, report, check);
    if (!o.metrics_path.empty()) {
        std::ofstream out{o.metrics_path};
        out << summary.dump(2) << '\n';
    }
    std::cout << "scenario " << s.name << " (" << to_string(s.mode) << ", " << s.parties.size() << " parties, t=" << s.max_steps
              << ")\n";
    std::cout << "outcome  " << to_string(report.result.kind) << ", rounds " << report.result.rounds << ", matches "
              << report.result.matches.size() << ", ticks " << report.ticks << '\n';
    std::cout << "winners ";
    for (auto w : report.result.winners) {
        std::cout << ' ' << report.names[w];
    }
    std::cout << "\nfinal    " << (report.result.final_hash ? to_hex(*report.result.final_hash) : "-") << '\n';
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.detail << '\n';
    return check.passed ? 0 : 1;
}

struct bench_options {
    std::string program;
    std::string algorithms = "linear,tournament,multistage";
    std::string parties = "2,4,8,16,32";
    std::string steps = "4096";
    std::string stages = "10,5,0";
    std::uint64_t seed = 1;
    std::string out_path;
};

int cmd_bench(const bench_options &o) {
    const auto initial = assemble_file(o.program);
    std::vector<bench_point> points;
    std::vector<std::string> algs;
    {
        std::stringstream in{o.algorithms};
        std::string item;
        while (std::getline(in, item, ',')) {
            algs.push_back(item == "single-stage" ? "tournament" : (item == "multi-stage" ? "multistage" : item));
        }
    }
    const auto party_counts = parse_list<std::size_t>(o.parties);
    const auto budgets = parse_list<std::uint64_t>(o.steps);
    std::cout << "mode        p      t        honest_hashes  honest_dispute  referee/match  rounds  won\n";
    for (const auto &alg : algs) {
        const auto mode = parse_mode(alg);
        for (auto t : budgets) {
            for (auto p : party_counts) {
                auto s = bench_scenario(initial, o.program, mode, p, t,
                                        mode == run_mode::multistage ? parse_strides(o.stages) : std::vector<unsigned>{},
                                        o.seed);
                auto b = run_bench_point(s);
                std::printf("%-10s %4zu %7llu %15llu %15llu %14.1f %7u  %s\n", alg.c_str(), p,
                            static_cast<unsigned long long>(t), static_cast<unsigned long long>(b.honest.hashes),
                            static_cast<unsigned long long>(b.honest.dispute_hashes()), b.referee_hashes_per_match,
                            b.rounds, b.honest_won ? "yes" : "NO");
                points.push_back(b);
            }
        }
    }
    nlohmann::ordered_json fits = nlohmann::ordered_json::array();
    std::cout << "\nfits\n";
    for (const auto &alg : algs) {
        const auto mode = parse_mode(alg);
        for (auto t : budgets) {
            std::vector<double> p, logp, honest, dispute;
            for (const auto &b : points) {
                if (b.mode == mode && b.max_steps == t) {
                    p.push_back(static_cast<double>(b.parties));
                    logp.push_back(std::ceil(std::log2(static_cast<double>(b.parties))));
                    honest.push_back(static_cast<double>(b.honest.hashes));
                    dispute.push_back(static_cast<double>(b.honest.dispute_hashes()));
                }
            }
            const auto vs_p = fit_line(p, honest);
            const auto vs_log = fit_line(logp, dispute);
            std::printf("%-10s t=%-7llu honest hashes ~ %.1f + %.1f p (max residual %.0f%%); dispute hashes ~ %.1f + %.1f log2 p "
                        "(max residual %.0f%%)\n",
                        alg.c_str(), static_cast<unsigned long long>(t), vs_p.intercept, vs_p.slope,
                        100 * vs_p.max_relative_residual, vs_log.intercept, vs_log.slope,
                        100 * vs_log.max_relative_residual);
            fits.push_back({{"mode", alg},
                            {"max_steps", t},
                            {"honest_vs_p", {{"intercept", vs_p.intercept}, {"slope", vs_p.slope}, {"residual", vs_p.max_relative_residual}}},
                            {"dispute_vs_log2p",
                             {{"intercept", vs_log.intercept}, {"slope", vs_log.slope}, {"residual", vs_log.max_relative_residual}}}});
        }
        if (budgets.size() >= 2) {
            for (auto p : party_counts) {
                std::vector<double> logt, per_match;
                for (const auto &b : points) {
                    if (b.mode == mode && b.parties == p) {
                        logt.push_back(std::log2(static_cast<double>(b.max_steps)));
                        per_match.push_back(b.referee_hashes_per_match);
                    }
                }
                const auto f = fit_line(logt, per_match);
                std::printf("%-10s p=%-4zu referee hashes per match ~ %.1f + %.1f log2 t\n", alg.c_str(), p, f.intercept, f.slope);
                fits.push_back({{"mode", alg},
                                {"parties", p},
                                {"referee_vs_log2t", {{"intercept", f.intercept}, {"slope", f.slope}, {"residual", f.max_relative_residual}}}});
            }
        }
    }
    if (!o.out_path.empty()) {
        std::ofstream out{o.out_path};
        out << nlohmann::ordered_json{{"points", bench_json(points)}, {"fits", fits}}.dump(2) << '\n';
    }
    return 0;
}

struct serve_cli {
    std::string scenario_path;
    std::string host = "127.0.0.1";
    std::uint16_t port = 7600;
    int registration_ms = 5000;
    std::size_t parties = 0;
    int timeout_ms = 2000;
    std::optional<std::string> mode;
    std::optional<std::string> stages;
    std::string transcript_path;
};

int cmd_serve(const serve_cli &o) {
    scenario s = load_scenario(o.scenario_path);
    run_options overrides;
    overrides.mode = o.mode;
    overrides.stages = o.stages;
    apply_overrides(s, overrides);
    serve_options opts{o.host, o.port, o.registration_ms, o.parties, o.timeout_ms};
    auto report = serve(opts, s, [&](std::uint16_t port) {
        std::cout << "listening on " << o.host << ':' << port << std::endl;
    });
    if (!o.transcript_path.empty()) {
        std::ofstream out{o.transcript_path};
        report.log.write(out);
    }
    std::cout << "parties ";
    for (std::size_t i = 0; i < report.names.size(); ++i) {
        std::cout << ' ' << report.names[i] << '(' << report.strategies[i] << ')';
    }
    std::cout << "\nverdict  " << to_string(report.result.kind) << "\nwinners ";
    for (auto w : report.result.winners) {
        std::cout << ' ' << report.names[w];
    }
    std::cout << "\nfinal    " << (report.result.final_hash ? to_hex(*report.result.final_hash) : "-") << '\n';
    return 0;
}

struct client_cli {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7600;
    std::string program;
    std::uint64_t max_steps = 1 << 12;
    std::string name;
    std::string strategy_text = "honest";
};

int cmd_client(const client_cli &o) {
    const auto initial = assemble_file(o.program);
    const auto plan = parse_strategy(o.strategy_text);
    auto report = run_client(o.host, o.port, o.name.empty() ? std::string{"client-"} + to_string(plan.kind) : o.name,
                             plan, initial, o.max_steps);
    if (!report) {
        std::cerr << "connection closed before a verdict\n";
        return 1;
    }
    std::cout << "verdict " << report->verdict.outcome << "\nwinners";
    for (const auto &w : report->verdict.winners) {
        std::cout << ' ' << w;
    }
    std::cout << "\nfinal   " << to_hex(report->verdict.final_hash) << "\nhashes  " << report->effort.hashes << '\n';
    return 0;
}

int cmd_verify(const std::string &path) {
    std::ifstream in{path};
    if (!in) {
        std::cerr << "cannot open " << path << '\n';
        return 1;
    }
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) {
            lines.push_back(line);
        }
    }
    const auto problems = verify_transcript(lines);
    for (const auto &p : problems) {
        std::cout << p << '\n';
    }
    std::cout << (problems.empty() ? "transcript OK" : "transcript FAILED") << " (" << lines.size() << " records)\n";
    return problems.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Refereed tournament dispute engine"};
    app.require_subcommand(1);

    run_options run;
    auto *run_cmd = app.add_subcommand("run", "Simulate a scenario");
    run_cmd->add_option("--scenario", run.scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", run.seed, "Scheduler seed");
    run_cmd->add_option("--mode", run.mode, "two-party, linear, tournament or multistage")
        ->check(CLI::IsMember({"two-party", "linear", "tournament", "multistage"}));
    run_cmd->add_option("--stages", run.stages, "Stride exponents, e.g. 10,5,0");
    run_cmd->add_option("--timeout-ticks", run.timeout_ticks, "Ticks a party has to answer");
    run_cmd->add_flag("--verify", run.verify, "Re-check the final hash and the transcript");
    run_cmd->add_option("--transcript", run.transcript_path, "Write the transcript (JSON lines)");
    run_cmd->add_option("--metrics", run.metrics_path, "Write the report and per-actor effort (JSON)");

    bench_options bench;
    auto *bench_cmd = app.add_subcommand("bench", "Sweep party counts and budgets, fit effort growth");
    bench_cmd->add_option("--program", bench.program, "Assembly program")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--algorithms", bench.algorithms, "Comma list of linear, tournament, multistage");
    bench_cmd->add_option("--parties", bench.parties, "Comma list of party counts");
    bench_cmd->add_option("--steps", bench.steps, "Comma list of step budgets (powers of two)");
    bench_cmd->add_option("--stages", bench.stages, "Stride exponents for multistage");
    bench_cmd->add_option("--seed", bench.seed, "Scheduler seed");
    bench_cmd->add_option("--out", bench.out_path, "Write the table and fits (JSON)");

    serve_cli serve_opts;
    auto *serve_cmd = app.add_subcommand("serve", "Run the referee over TCP");
    serve_cmd->add_option("--scenario", serve_opts.scenario_path, "Scenario JSON (program, budget, mode, stages)")
        ->required()
        ->check(CLI::ExistingFile);
    serve_cmd->add_option("--host", serve_opts.host, "Listen address");
    serve_cmd->add_option("--port", serve_opts.port, "Listen port (0 picks one)");
    serve_cmd->add_option("--registration-ms", serve_opts.registration_ms, "Registration window");
    serve_cmd->add_option("--parties", serve_opts.parties, "Start once this many parties registered");
    serve_cmd->add_option("--timeout-ms", serve_opts.timeout_ms, "Per-query timeout");
    serve_cmd->add_option("--mode", serve_opts.mode, "Override the scenario mode")
        ->check(CLI::IsMember({"two-party", "linear", "tournament", "multistage"}));
    serve_cmd->add_option("--stages", serve_opts.stages, "Override the stride exponents");
    serve_cmd->add_option("--transcript", serve_opts.transcript_path, "Write the transcript (JSON lines)");

    client_cli client;
    auto *client_cmd = app.add_subcommand("client", "Join a referee as one party");
    client_cmd->add_option("--host", client.host, "Referee address");
    client_cmd->add_option("--port", client.port, "Referee port");
    client_cmd->add_option("--program", client.program, "Assembly program")->required()->check(CLI::ExistingFile);
    client_cmd->add_option("--max-steps", client.max_steps, "Step budget t");
    client_cmd->add_option("--name", client.name, "Party name");
    client_cmd->add_option("--strategy", client.strategy_text, "e.g. honest, corrupt_state:step=5, stall:phase=log")
        ->check([](const std::string &text) {
            try {
                parse_strategy(text);
                return std::string{};
            } catch (const std::invalid_argument &e) {
                return std::string{e.what()};
            }
        });

    std::string transcript_path;
    auto *verify_cmd = app.add_subcommand("verify", "Re-check a recorded transcript");
    verify_cmd->add_option("transcript", transcript_path, "Transcript file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            return cmd_run(run);
        }
        if (*bench_cmd) {
            return cmd_bench(bench);
        }
        if (*serve_cmd) {
            return cmd_serve(serve_opts);
        }
        if (*client_cmd) {
            return cmd_client(client);
        }
        if (*verify_cmd) {
            return cmd_verify(transcript_path);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
