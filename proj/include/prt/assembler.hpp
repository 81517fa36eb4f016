#pragma once

/// \file
/// \brief Text assembler for the toy machine
///
/// One instruction per line, `;` starts a comment, `name:` defines a label.
///
///     LOADI rd, imm      ADD rd, rs       SUB rd, rs
///     LOAD rd, imm       STORE rs, addr   JMP target
///     BNZ rs, target     HALT
///     .data addr value   ; places a word outside the code area
///     .size log2         ; requests at least 2^log2 words
///
/// Code is placed from address 16 and PC starts there. Immediates accept
/// decimal, 0x hex, negative values and label names.

#include <stdexcept>
#include <string>
#include <string_view>

#include "prt/machine.hpp"

namespace prt {

class assembly_error : public std::runtime_error {
public:
    assembly_error(int line, const std::string &what) :
        std::runtime_error{"line " + std::to_string(line) + ": " + what},
        m_line{line} {}

    int line() const noexcept {
        return m_line;
    }

private:
    int m_line;
};

machine_state assemble(std::string_view source);

/// Reads and assembles a program file.
machine_state assemble_file(const std::string &path);

} // namespace prt
