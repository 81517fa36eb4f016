#include <utility>
#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "prt/merkle.hpp"
#include "prt/steplog.hpp"

using namespace prt;

namespace {

// Applies one random single-field mutation to a copy of `log`.
access_log mutate(const access_log &log, std::mt19937_64 &rng) {
    access_log m = log;
    auto &e = m.entries[rng() % m.entries.size()];
    switch (rng() % 7) {
        case 0:
            e.type = e.type == access_type::read ? access_type::write : access_type::read;
            break;
        case 1:
            e.address ^= std::uint64_t{1} << (rng() % 8);
            break;
        case 2:
            e.prior ^= word{1} << (rng() % 64);
            break;
        case 3:
            if (!e.siblings.empty()) {
                e.siblings[rng() % e.siblings.size()][rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255);
            }
            break;
        case 4:
            m.entries.erase(m.entries.begin() + static_cast<std::ptrdiff_t>(rng() % m.entries.size()));
            break;
        case 5:
            m.entries.push_back(m.entries[rng() % m.entries.size()]);
            break;
        default:
            if (!e.siblings.empty()) {
                e.siblings.pop_back();
            }
            break;
    }
    return m;
}

} // namespace

TEST_CASE("halted step replays to the same root") {
    auto s = assemble("HALT");
    auto tree = state_tree(s);
    auto [next, log] = step_with_log(std::as_const(s), std::as_const(tree));
    CHECK(next == s);
    CHECK(log.entries.size() == 2);
    auto r = step_hash(tree.root(), log);
    REQUIRE(r.accepted());
    CHECK(*r.root == tree.root());
}

TEST_CASE("LOADI log shape") {
    auto s = assemble("LOADI r1, 7\nHALT");
    auto tree = state_tree(s);
    auto [next, log] = step_with_log(std::as_const(s), std::as_const(tree));
    REQUIRE(log.entries.size() == 4);
    CHECK(log.entries[0].type == access_type::read);
    CHECK(log.entries[0].address == pc_address);
    CHECK(log.entries[1].type == access_type::read);
    CHECK(log.entries[1].address == code_base);
    CHECK(log.entries[2].type == access_type::write);
    CHECK(log.entries[2].address == register_address(1));
    CHECK(log.entries[3].type == access_type::write);
    CHECK(log.entries[3].address == pc_address);
    CHECK(log.entries[3].prior == code_base);
    auto r = step_hash(tree.root(), log);
    REQUIRE(r.accepted());
    CHECK(*r.root == test::to_prt(oracle::words_root(test::words_of(next))));
}

TEST_CASE("replay matches direct hashing for every step of the corpus") {
    for (const auto &name : {"sum.asm", "fib.asm", "addi.asm"}) {
        CAPTURE(name);
        auto s = assemble_file(test::program_path(name));
        auto tree = state_tree(s);
        for (int k = 0; k < 400; ++k) {
            const auto before = tree.root();
            auto log = step_with_log(s, tree);
            auto r = step_hash(before, log);
            REQUIRE(r.accepted());
            REQUIRE(*r.root == test::to_prt(oracle::words_root(test::words_of(s))));
            REQUIRE(tree.root() == *r.root);
        }
    }
}

TEST_CASE("specific rejections") {
    auto s = assemble("LOADI r1, 7\nADD r1, r1\nHALT");
    s = step(s);
    auto tree = state_tree(s);
    auto [next, log] = step_with_log(std::as_const(s), std::as_const(tree));
    const auto m = tree.root();

    auto altered = log;
    altered.entries[2].prior += 1;
    CHECK(step_hash(m, altered).reason == reject_reason::proof_mismatch);

    auto swapped = log;
    swapped.entries[2].type = access_type::write;
    CHECK(step_hash(m, swapped).reason == reject_reason::type_mismatch);

    auto moved = log;
    moved.entries[2].address = 5;
    CHECK(step_hash(m, moved).reason == reject_reason::address_mismatch);

    auto shorter = log;
    shorter.entries.pop_back();
    CHECK(step_hash(m, shorter).reason == reject_reason::length_mismatch);

    auto longer = log;
    longer.entries.push_back(longer.entries.back());
    CHECK(step_hash(m, longer).reason == reject_reason::length_mismatch);

    CHECK(step_hash(m, access_log{}).reason == reject_reason::length_mismatch);
}

TEST_CASE("random mutations never yield a different accepted root") {
    std::mt19937_64 rng{2024};
    for (const auto &name : {"sum.asm", "fib.asm", "checksum.asm"}) {
        auto s = assemble_file(test::program_path(name));
        auto tree = state_tree(s);
        int rejected = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto m = tree.root();
            auto log = step_with_log(s, tree);
            const auto genuine = tree.root();
            auto r = step_hash(m, mutate(log, rng));
            if (r.accepted()) {
                REQUIRE(*r.root == genuine);
            } else {
                ++rejected;
            }
        }
        CHECK(rejected > 900);
    }
}

TEST_CASE("step_hash is pure") {
    auto s = assemble_file(test::program_path("fib.asm"));
    auto tree = state_tree(s);
    auto log = step_with_log(s, tree);
    auto m = state_hash(assemble_file(test::program_path("fib.asm")));
    CHECK(step_hash(m, log).root == step_hash(m, log).root);
}

TEST_CASE("log wire encoding round trip") {
    auto s = assemble_file(test::program_path("sum.asm"));
    auto tree = state_tree(s);
    for (int k = 0; k < 12; ++k) {
        auto log = step_with_log(s, tree);
        auto data = encode_log(log);
        auto back = decode_log(data);
        REQUIRE(back.has_value());
        REQUIRE(back->entries.size() == log.entries.size());
        for (std::size_t i = 0; i < log.entries.size(); ++i) {
            CHECK(back->entries[i].type == log.entries[i].type);
            CHECK(back->entries[i].address == log.entries[i].address);
            CHECK(back->entries[i].prior == log.entries[i].prior);
            CHECK(back->entries[i].siblings == log.entries[i].siblings);
        }
        data.push_back(0);
        CHECK_FALSE(decode_log(data).has_value());
    }
}
