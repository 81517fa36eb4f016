#include <bit>

#include "doctest.h"
#include "test_support.hpp"

using namespace prt;

TEST_CASE("empty program halts immediately") {
    auto s = assemble("");
    CHECK(s.pc() == code_base);
    CHECK(is_halted(s));
    for (std::uint64_t a = 1; a < s.size(); ++a) {
        CHECK(s[a] == 0);
    }
}

TEST_CASE("instructions are placed at the code base") {
    auto s = assemble("LOADI r1, 7\nHALT\n");
    CHECK(s.pc() == code_base);
    CHECK(decode(s[code_base]) == instruction{opcode::loadi, 1, 0, 7});
    CHECK(s[code_base + 1] == encode({opcode::halt}));
    CHECK(std::has_single_bit(s.size()));
}

TEST_CASE("labels, hex and negative immediates") {
    auto s = assemble("start: LOADI r2, -3 ; comment\n"
                      "       LOADI r3, 0x10\n"
                      "       JMP start\n"
                      ".data 100 0xff\n");
    CHECK(decode(s[16]).imm == -3);
    CHECK(decode(s[17]).imm == 16);
    CHECK(decode(s[18]) == instruction{opcode::jmp, 0, 0, 16});
    CHECK(s[100] == 255);
    CHECK(s.size() == 128);
}

TEST_CASE(".size requests a larger state") {
    CHECK(assemble(".size 10\nHALT").size() == 1024);
}

TEST_CASE("parse errors carry the line number") {
    try {
        assemble("HALT\nBOGUS r1\n");
        FAIL("expected an error");
    } catch (const assembly_error &e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(assemble("LOADI r9, 1"), assembly_error);
    CHECK_THROWS_AS(assemble("JMP nowhere"), assembly_error);
    CHECK_THROWS_AS(assemble("ADD r1"), assembly_error);
}

TEST_CASE("address collisions are rejected") {
    CHECK_THROWS_AS(assemble("HALT\n.data 16 1"), assembly_error);
    CHECK_THROWS_AS(assemble(".data 40 1\n.data 40 2"), assembly_error);
    CHECK_THROWS_AS(assemble(".data 0 5"), assembly_error);
}
