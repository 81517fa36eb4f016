#include "prt/bench.hpp"

#include <cmath>

namespace prt {

scenario bench_scenario(const machine_state &initial, std::string program, run_mode mode, std::size_t parties,
                        std::uint64_t max_steps, std::vector<unsigned> strides, std::uint64_t seed) {
    scenario s;
    s.name = std::string{to_string(mode)} + "-p" + std::to_string(parties) + "-t" + std::to_string(max_steps);
    s.program = std::move(program);
    s.initial = initial;
    s.max_steps = max_steps;
    s.mode = mode;
    if (!strides.empty()) {
        s.strides = std::move(strides);
    }
    s.seed = seed;
    add_parties(s, strategy{});
    const std::uint64_t gap = std::max<std::uint64_t>(max_steps / (parties + 1), 1);
    strategy corrupt;
    corrupt.kind = strategy_kind::corrupt_state;
    corrupt.step = gap;
    add_parties(s, corrupt, parties - 1, gap);
    return s;
}

bench_point run_bench_point(const scenario &s) {
    bench_point b;
    b.mode = s.mode;
    b.parties = s.parties.size();
    b.max_steps = s.max_steps;
    b.strides = s.stages().strides;
    auto report = simulate(s);
    b.honest_won = check_expectation(s, report.names, report.result).passed;
    b.honest = report.effort.at(s.parties.front().name);
    b.referee = report.effort.at("referee");
    b.rounds = report.result.rounds;
    b.matches = report.result.matches.size();
    std::uint64_t total = 0;
    std::size_t counted = 0;
    for (const auto &m : report.result.matches) {
        if (m.stage == 0) {
            total += m.referee_hashes;
            ++counted;
        }
    }
    b.referee_hashes_per_match = counted == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(counted);
    return b;
}

line_fit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
    line_fit f;
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) {
        return f;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    f.slope = den == 0 ? 0 : (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fitted = f.intercept + f.slope * x[i];
        if (y[i] != 0) {
            f.max_relative_residual = std::max(f.max_relative_residual, std::abs(y[i] - fitted) / std::abs(y[i]));
        }
    }
    return f;
}

nlohmann::ordered_json bench_json(const std::vector<bench_point> &points) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto &b : points) {
        rows.push_back({{"mode", to_string(b.mode)},
                        {"parties", b.parties},
                        {"max_steps", b.max_steps},
                        {"stages", b.strides},
                        {"honest_won", b.honest_won},
                        {"honest_hashes", b.honest.hashes},
                        {"honest_dispute_hashes", b.honest.dispute_hashes()},
                        {"honest_steps", b.honest.steps},
                        {"honest_messages", b.honest.messages_sent},
                        {"referee_hashes", b.referee.hashes},
                        {"referee_hashes_per_match", b.referee_hashes_per_match},
                        {"rounds", b.rounds},
                        {"matches", b.matches}});
    }
    return rows;
}

} // namespace prt
