#include "prt/machine.hpp"

#include <bit>
#include <sstream>

namespace prt {

word encode(const instruction &insn) noexcept {
    return static_cast<word>(static_cast<std::uint8_t>(insn.op)) | (static_cast<word>(insn.rd & 7U) << 8) |
        (static_cast<word>(insn.rs & 7U) << 16) | (static_cast<word>(static_cast<std::uint32_t>(insn.imm)) << 32);
}

instruction decode(word w) noexcept {
    instruction insn;
    const auto raw = static_cast<std::uint8_t>(w & 0xff);
    insn.op = raw <= static_cast<std::uint8_t>(opcode::bnz) ? static_cast<opcode>(raw) : opcode::halt;
    insn.rd = static_cast<unsigned>((w >> 8) & 7U);
    insn.rs = static_cast<unsigned>((w >> 16) & 7U);
    insn.imm = static_cast<std::int32_t>(static_cast<std::uint32_t>(w >> 32));
    return insn;
}

const char *opcode_name(opcode op) noexcept {
    switch (op) {
        case opcode::halt:
            return "HALT";
        case opcode::loadi:
            return "LOADI";
        case opcode::add:
            return "ADD";
        case opcode::sub:
            return "SUB";
        case opcode::load:
            return "LOAD";
        case opcode::store:
            return "STORE";
        case opcode::jmp:
            return "JMP";
        case opcode::bnz:
            return "BNZ";
    }
    return "HALT";
}

std::string to_string(const instruction &insn) {
    std::ostringstream out;
    out << opcode_name(insn.op);
    switch (insn.op) {
        case opcode::halt:
            break;
        case opcode::loadi:
        case opcode::load:
            out << " r" << insn.rd << ", " << insn.imm;
            break;
        case opcode::add:
        case opcode::sub:
            out << " r" << insn.rd << ", r" << insn.rs;
            break;
        case opcode::store:
            out << " r" << insn.rs << ", " << insn.imm;
            break;
        case opcode::jmp:
            out << ' ' << insn.imm;
            break;
        case opcode::bnz:
            out << " r" << insn.rs << ", " << insn.imm;
            break;
    }
    return out.str();
}

machine_state::machine_state(unsigned log2_words) : m_log2_size{log2_words} {
    if (log2_words < min_log2_words || log2_words > max_log2_words) {
        throw std::invalid_argument{"machine size out of range: 2^" + std::to_string(log2_words) + " words"};
    }
    m_words.assign(std::uint64_t{1} << log2_words, 0);
}

machine_state::machine_state(std::vector<word> words) : m_words{std::move(words)}, m_log2_size{0} {
    if (!std::has_single_bit(m_words.size())) {
        throw std::invalid_argument{"machine state length must be a power of two"};
    }
    m_log2_size = static_cast<unsigned>(std::countr_zero(m_words.size()));
    if (m_log2_size < min_log2_words || m_log2_size > max_log2_words) {
        throw std::invalid_argument{"machine size out of range: 2^" + std::to_string(m_log2_size) + " words"};
    }
}

bool is_halted(const machine_state &state) noexcept {
    return decode(state[state.pc()]).op == opcode::halt;
}

void step_in_place(machine_state &state) {
    detail::count_step();
    direct_access access{state};
    execute_step(access, state.address_mask());
}

machine_state step(machine_state state) {
    step_in_place(state);
    return state;
}

run_result run(machine_state state, std::uint64_t max_steps) {
    std::uint64_t taken = 0;
    while (taken < max_steps && !is_halted(state)) {
        step_in_place(state);
        ++taken;
    }
    return {std::move(state), taken};
}

std::uint64_t advance(machine_state &state, std::uint64_t count) {
    std::uint64_t taken = 0;
    while (taken < count && !is_halted(state)) {
        step_in_place(state);
        ++taken;
    }
    return taken;
}

bytes save_snapshot(const machine_state &state) {
    bytes out;
    out.reserve(1 + state.size() * 8);
    out.push_back(static_cast<std::uint8_t>(state.log2_size()));
    for (auto w : state.words()) {
        for (unsigned i = 0; i < 8; ++i) {
            out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
        }
    }
    return out;
}

machine_state load_snapshot(std::span<const std::uint8_t> data) {
    if (data.empty()) {
        throw std::invalid_argument{"empty snapshot"};
    }
    const unsigned log2_words = data[0];
    if (log2_words < min_log2_words || log2_words > max_log2_words) {
        throw std::invalid_argument{"snapshot size out of range"};
    }
    const std::uint64_t count = std::uint64_t{1} << log2_words;
    if (data.size() != 1 + count * 8) {
        throw std::invalid_argument{"snapshot length does not match its header"};
    }
    std::vector<word> words(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        word w = 0;
        for (unsigned b = 0; b < 8; ++b) {
            w |= static_cast<word>(data[1 + i * 8 + b]) << (8 * b);
        }
        words[i] = w;
    }
    return machine_state{std::move(words)};
}

} // namespace prt
