#pragma once

/// \file
/// \brief Effort sweeps over party count, step budget and protocol

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "prt/harness.hpp"

namespace prt {

struct bench_point {
    run_mode mode = run_mode::tournament;
    std::size_t parties = 2;
    std::uint64_t max_steps = 0;
    std::vector<unsigned> strides;
    bool honest_won = false;
    effort_meter honest;
    effort_meter referee;
    unsigned rounds = 0;
    std::size_t matches = 0;
    /// Mean referee hashes per match (outermost stage for multistage runs).
    double referee_hashes_per_match = 0;
};

/// One honest party against parties - 1 state corruptors with distinct
/// corruption steps, so every dishonest party posts a different claim.
scenario bench_scenario(const machine_state &initial, std::string program, run_mode mode, std::size_t parties,
                        std::uint64_t max_steps, std::vector<unsigned> strides, std::uint64_t seed);

bench_point run_bench_point(const scenario &s);

struct line_fit {
    double intercept = 0;
    double slope = 0;
    /// max |y - fit| / y over the points.
    double max_relative_residual = 0;
};

line_fit fit_line(const std::vector<double> &x, const std::vector<double> &y);

nlohmann::ordered_json bench_json(const std::vector<bench_point> &points);

} // namespace prt
