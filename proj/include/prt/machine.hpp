#pragma once

/// \file
/// \brief Deterministic toy machine with a word-addressable state
///
/// The whole machine state is a power-of-two array of 64-bit words. The
/// program counter lives at address 0 and general registers r0..r7 at
/// addresses 1..8, so a Merkle tree over the array covers everything.
///
/// Instruction word layout:
///
///     bits  0..7   opcode
///     bits  8..10  rd
///     bits 16..18  rs
///     bits 32..63  imm (signed 32-bit)
///
/// Addresses are reduced modulo the state size, and every opcode outside the
/// defined set decodes to HALT, so step is total on arbitrary states.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prt/effort.hpp"
#include "prt/hash.hpp"

namespace prt {

inline constexpr std::uint64_t pc_address = 0;
inline constexpr std::uint64_t register_base = 1;
inline constexpr unsigned register_count = 8;
inline constexpr std::uint64_t code_base = 16;
inline constexpr unsigned min_log2_words = 4;
inline constexpr unsigned max_log2_words = 24;

/// Upper bound on log entries per step: PC read, fetch, two operand reads, one write, PC write.
inline constexpr std::size_t max_step_accesses = 6;
/// Upper bound on distinct word addresses touched by one step.
inline constexpr std::size_t max_step_addresses = 4;

constexpr std::uint64_t register_address(unsigned r) noexcept {
    return register_base + (r % register_count);
}

enum class opcode : std::uint8_t {
    halt = 0,
    loadi = 1, ///< rd = imm
    add = 2,   ///< rd = rd + rs
    sub = 3,   ///< rd = rd - rs
    load = 4,  ///< rd = mem[rd + imm]
    store = 5, ///< mem[imm] = rs
    jmp = 6,   ///< pc = imm
    bnz = 7,   ///< if rs != 0 then pc = imm
};

struct instruction {
    opcode op = opcode::halt;
    unsigned rd = 0;
    unsigned rs = 0;
    std::int32_t imm = 0;

    bool operator==(const instruction &) const = default;
};

word encode(const instruction &insn) noexcept;
instruction decode(word w) noexcept;
std::string to_string(const instruction &insn);
const char *opcode_name(opcode op) noexcept;

class machine_state {
public:
    /// All-zero state with 2^log2_words words.
    explicit machine_state(unsigned log2_words = min_log2_words);
    explicit machine_state(std::vector<word> words);

    unsigned log2_size() const noexcept {
        return m_log2_size;
    }
    std::uint64_t size() const noexcept {
        return m_words.size();
    }
    std::uint64_t address_mask() const noexcept {
        return m_words.size() - 1;
    }

    word operator[](std::uint64_t address) const noexcept {
        return m_words[address & address_mask()];
    }
    word &operator[](std::uint64_t address) noexcept {
        return m_words[address & address_mask()];
    }

    word pc() const noexcept {
        return m_words[pc_address];
    }
    word reg(unsigned r) const noexcept {
        return m_words[register_address(r)];
    }

    std::span<const word> words() const noexcept {
        return m_words;
    }

    bool operator==(const machine_state &) const = default;

private:
    std::vector<word> m_words;
    unsigned m_log2_size;
};

/// Whether the instruction at PC is HALT (step is then the identity).
bool is_halted(const machine_state &state) noexcept;

/// Executes one instruction through a state-access backend.
///
/// Access must provide `word read(std::uint64_t)`, `word fetch(std::uint64_t)`
/// and `void write(std::uint64_t, word)`. Addresses passed in are already
/// reduced by `mask`. The same routine drives plain execution, access-log
/// recording and access-log replay.
template <typename Access>
void execute_step(Access &a, std::uint64_t mask) {
    const word pc = a.read(pc_address);
    const instruction insn = decode(a.fetch(pc & mask));
    const auto next = pc + 1;
    switch (insn.op) {
        case opcode::halt:
            return;
        case opcode::loadi:
            a.write(register_address(insn.rd), static_cast<word>(static_cast<std::int64_t>(insn.imm)));
            break;
        case opcode::add: {
            const word x = a.read(register_address(insn.rd));
            const word y = a.read(register_address(insn.rs));
            a.write(register_address(insn.rd), x + y);
            break;
        }
        case opcode::sub: {
            const word x = a.read(register_address(insn.rd));
            const word y = a.read(register_address(insn.rs));
            a.write(register_address(insn.rd), x - y);
            break;
        }
        case opcode::load: {
            const word base = a.read(register_address(insn.rd));
            const word value = a.read((base + static_cast<word>(static_cast<std::int64_t>(insn.imm))) & mask);
            a.write(register_address(insn.rd), value);
            break;
        }
        case opcode::store: {
            const word value = a.read(register_address(insn.rs));
            a.write(static_cast<word>(static_cast<std::uint32_t>(insn.imm)) & mask, value);
            break;
        }
        case opcode::jmp:
            a.write(pc_address, static_cast<word>(static_cast<std::uint32_t>(insn.imm)));
            return;
        case opcode::bnz: {
            const word value = a.read(register_address(insn.rs));
            a.write(pc_address, value != 0 ? static_cast<word>(static_cast<std::uint32_t>(insn.imm)) : next);
            return;
        }
    }
    a.write(pc_address, next);
}

/// Direct backend over a mutable state.
class direct_access {
public:
    explicit direct_access(machine_state &state) noexcept : m_state{state} {}
    word read(std::uint64_t address) const noexcept {
        return m_state[address];
    }
    word fetch(std::uint64_t address) const noexcept {
        return m_state[address];
    }
    void write(std::uint64_t address, word value) noexcept {
        m_state[address] = value;
    }

private:
    machine_state &m_state;
};

void step_in_place(machine_state &state);
machine_state step(machine_state state);

struct run_result {
    machine_state state;
    std::uint64_t steps_taken = 0;
};

/// Applies step until the machine halts or max_steps have been taken.
run_result run(machine_state state, std::uint64_t max_steps);

/// Advances the state by exactly `count` steps (halted states stay put); returns steps that changed the state.
std::uint64_t advance(machine_state &state, std::uint64_t count);

/// Binary snapshot: log2 size (1 byte) followed by 2^d little-endian words.
bytes save_snapshot(const machine_state &state);
machine_state load_snapshot(std::span<const std::uint8_t> data);

} // namespace prt
