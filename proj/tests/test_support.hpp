#pragma once

#include <cstring>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "prt/assembler.hpp"
#include "prt/hash.hpp"
#include "prt/machine.hpp"

namespace test {

inline std::string program_path(const std::string &name) {
    return std::string{PRT_PROGRAM_DIR} + "/" + name;
}

inline std::vector<std::uint64_t> words_of(const prt::machine_state &s) {
    return {s.words().begin(), s.words().end()};
}

inline prt::hash to_prt(const oracle::digest &d) {
    prt::hash h;
    std::memcpy(h.data(), d.data(), 32);
    return h;
}

inline const std::vector<std::string> &corpus() {
    static const std::vector<std::string> names{"sum.asm", "fib.asm", "addi.asm", "checksum.asm"};
    return names;
}

} // namespace test
