#include "prt/assembler.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace prt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::string upper(std::string_view s) {
    std::string out{s};
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

// Operands are separated by commas and/or whitespace.
std::vector<std::string_view> split_operands(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    bool need_operand = false;
    while (i < s.size()) {
        if (s[i] == ' ' || s[i] == '\t') {
            ++i;
            continue;
        }
        if (s[i] == ',') {
            if (out.empty() || need_operand) {
                out.emplace_back(); // empty operand, reported by the caller
            }
            need_operand = true;
            ++i;
            continue;
        }
        const auto end = s.find_first_of(", \t", i);
        out.push_back(s.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i));
        need_operand = false;
        i = end == std::string_view::npos ? s.size() : end;
    }
    if (need_operand) {
        out.emplace_back();
    }
    return out;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_')) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '.'; });
}

std::optional<std::int64_t> parse_number(std::string_view s) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        s.remove_prefix(2);
    }
    if (s.empty()) {
        return std::nullopt;
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    const auto v = static_cast<std::int64_t>(value);
    return negative ? -v : v;
}

struct pending_line {
    int line;
    opcode op;
    std::vector<std::string> operands;
};

class assembler {
public:
    machine_state run(std::string_view source) {
        first_pass(source);
        return second_pass();
    }

private:
    std::map<std::string, std::int64_t> m_labels;
    std::vector<pending_line> m_code;
    std::map<std::uint64_t, std::pair<std::string, int>> m_data; // address -> (value text, line)
    unsigned m_min_log2 = min_log2_words;

    void first_pass(std::string_view source) {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= source.size()) {
            const auto eol = source.find('\n', pos);
            auto line = source.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
            ++line_no;
            if (const auto semi = line.find(';'); semi != std::string_view::npos) {
                line = line.substr(0, semi);
            }
            line = trim(line);
            while (!line.empty()) {
                const auto colon = line.find(':');
                if (colon == std::string_view::npos) {
                    break;
                }
                const auto label = trim(line.substr(0, colon));
                if (!is_identifier(label)) {
                    throw assembly_error{line_no, "invalid label '" + std::string{label} + "'"};
                }
                if (!m_labels.emplace(std::string{label}, static_cast<std::int64_t>(code_base + m_code.size())).second) {
                    throw assembly_error{line_no, "duplicate label '" + std::string{label} + "'"};
                }
                line = trim(line.substr(colon + 1));
            }
            if (line.empty()) {
                continue;
            }
            const auto space = line.find_first_of(" \t");
            const auto mnemonic = upper(line.substr(0, space));
            const auto rest = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
            auto operands = split_operands(rest);
            if (mnemonic == ".DATA") {
                parse_data(line_no, operands);
                continue;
            }
            if (mnemonic == ".SIZE") {
                if (operands.size() != 1) {
                    throw assembly_error{line_no, ".size expects one operand"};
                }
                const auto v = parse_number(operands[0]);
                if (!v || *v < min_log2_words || *v > max_log2_words) {
                    throw assembly_error{line_no, "invalid .size"};
                }
                m_min_log2 = std::max(m_min_log2, static_cast<unsigned>(*v));
                continue;
            }
            pending_line pending{line_no, parse_mnemonic(line_no, mnemonic), {}};
            for (auto op : operands) {
                pending.operands.emplace_back(op);
            }
            check_arity(pending);
            m_code.push_back(std::move(pending));
        }
    }

    void parse_data(int line_no, const std::vector<std::string_view> &operands) {
        if (operands.size() != 2) {
            throw assembly_error{line_no, ".data expects an address and a value"};
        }
        const auto address = parse_number(operands[0]);
        if (!address || *address < 0) {
            throw assembly_error{line_no, "invalid .data address"};
        }
        const auto a = static_cast<std::uint64_t>(*address);
        if (!m_data.emplace(a, std::make_pair(std::string{operands[1]}, line_no)).second) {
            throw assembly_error{line_no, "address collision at " + std::to_string(a)};
        }
    }

    static opcode parse_mnemonic(int line_no, const std::string &m) {
        static const std::map<std::string, opcode> table{{"HALT", opcode::halt}, {"LOADI", opcode::loadi},
            {"ADD", opcode::add}, {"SUB", opcode::sub}, {"LOAD", opcode::load}, {"STORE", opcode::store},
            {"JMP", opcode::jmp}, {"BNZ", opcode::bnz}};
        const auto it = table.find(m);
        if (it == table.end()) {
            throw assembly_error{line_no, "unknown mnemonic '" + m + "'"};
        }
        return it->second;
    }

    static void check_arity(const pending_line &p) {
        std::size_t expected = 2;
        if (p.op == opcode::halt) {
            expected = 0;
        } else if (p.op == opcode::jmp) {
            expected = 1;
        }
        if (p.operands.size() != expected) {
            throw assembly_error{p.line,
                std::string{opcode_name(p.op)} + " expects " + std::to_string(expected) + " operand(s)"};
        }
    }

    static unsigned parse_register(int line_no, std::string_view s) {
        if (s.size() == 2 && (s[0] == 'r' || s[0] == 'R') && s[1] >= '0' && s[1] < '0' + static_cast<int>(register_count)) {
            return static_cast<unsigned>(s[1] - '0');
        }
        throw assembly_error{line_no, "expected register r0..r7, got '" + std::string{s} + "'"};
    }

    std::int64_t parse_value(int line_no, std::string_view s) const {
        if (auto v = parse_number(s)) {
            return *v;
        }
        if (const auto it = m_labels.find(std::string{s}); it != m_labels.end()) {
            return it->second;
        }
        throw assembly_error{line_no, "invalid immediate '" + std::string{s} + "'"};
    }

    std::int32_t parse_imm(int line_no, std::string_view s) const {
        const auto v = parse_value(line_no, s);
        if (v < INT32_MIN || v > static_cast<std::int64_t>(UINT32_MAX)) {
            throw assembly_error{line_no, "immediate out of range '" + std::string{s} + "'"};
        }
        return static_cast<std::int32_t>(static_cast<std::uint32_t>(v));
    }

    machine_state second_pass() const {
        std::uint64_t highest = code_base + std::max<std::uint64_t>(m_code.size(), 1);
        const auto code_end = code_base + m_code.size();
        for (const auto &[address, entry] : m_data) {
            if (address >= code_base && address < code_end) {
                throw assembly_error{entry.second, "address collision at " + std::to_string(address)};
            }
            if (address == pc_address) {
                throw assembly_error{entry.second, "address collision at 0 (program counter)"};
            }
            highest = std::max(highest, address + 1);
        }
        const auto log2_words = std::max<unsigned>(m_min_log2, static_cast<unsigned>(std::bit_width(highest - 1)));
        if (log2_words > max_log2_words) {
            throw assembly_error{0, "program does not fit in the machine"};
        }
        machine_state state{log2_words};
        state[pc_address] = code_base;
        for (std::size_t i = 0; i < m_code.size(); ++i) {
            const auto &p = m_code[i];
            instruction insn{.op = p.op};
            switch (p.op) {
                case opcode::halt:
                    break;
                case opcode::loadi:
                case opcode::load:
                    insn.rd = parse_register(p.line, p.operands[0]);
                    insn.imm = parse_imm(p.line, p.operands[1]);
                    break;
                case opcode::add:
                case opcode::sub:
                    insn.rd = parse_register(p.line, p.operands[0]);
                    insn.rs = parse_register(p.line, p.operands[1]);
                    break;
                case opcode::store:
                case opcode::bnz:
                    insn.rs = parse_register(p.line, p.operands[0]);
                    insn.imm = parse_imm(p.line, p.operands[1]);
                    break;
                case opcode::jmp:
                    insn.imm = parse_imm(p.line, p.operands[0]);
                    break;
            }
            state[code_base + i] = encode(insn);
        }
        for (const auto &[address, entry] : m_data) {
            state[address] = static_cast<word>(parse_value(entry.second, entry.first));
        }
        return state;
    }
};

} // namespace

machine_state assemble(std::string_view source) {
    return assembler{}.run(source);
}

machine_state assemble_file(const std::string &path) {
    std::ifstream in{path};
    if (!in) {
        throw std::runtime_error{"cannot open program file " + path};
    }
    std::ostringstream text;
    text << in.rdbuf();
    return assemble(text.str());
}

} // namespace prt
