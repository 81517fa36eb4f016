#include "doctest.h"
#include "test_support.hpp"
#include "prt/commitment.hpp"
#include "prt/effort.hpp"

using namespace prt;

namespace {

// Hashes every state of the reference interpreter over [0, span] and pads
// the leaves like the commitment layout does.
std::vector<oracle::digest> brute_points(const machine_state &initial, std::uint64_t span) {
    oracle::interpreter ref{test::words_of(initial)};
    std::vector<oracle::digest> points{oracle::words_root(ref.mem)};
    for (std::uint64_t i = 0; i < span; ++i) {
        ref.step();
        points.push_back(oracle::words_root(ref.mem));
    }
    return points;
}

} // namespace

TEST_CASE("stage configuration validation") {
    CHECK_NOTHROW((stage_config{{10, 5, 0}, 1 << 15}.validate()));
    CHECK_NOTHROW(stage_config::dense(8).validate());
    CHECK_THROWS((stage_config{{10, 5, 1}, 1 << 15}.validate()));
    CHECK_THROWS((stage_config{{5, 10, 0}, 1 << 15}.validate()));
    CHECK_THROWS((stage_config{{16, 0}, 1 << 15}.validate()));
    CHECK_THROWS((stage_config{{0}, 12}.validate()));
    stage_config c{{10, 5, 0}, 1 << 15};
    CHECK(c.span_of(0) == 1 << 15);
    CHECK(c.span_of(1) == 1 << 10);
    CHECK(c.span_of(2) == 1 << 5);
}

TEST_CASE("dense commitment over the sum program matches brute force") {
    auto s = assemble_file(test::program_path("sum.asm"));
    auto c = build_commitment(s, 0, 8, 0);
    auto pts = brute_points(s, 8);
    REQUIRE(c.leaf_count() == 16);
    std::vector<oracle::digest> leaves(pts.begin(), pts.end());
    leaves.resize(16, pts.back());
    CHECK(c.root() == test::to_prt(oracle::root_of(leaves)));
    CHECK(c.end_index() == 8);
    CHECK(c.final_leaf_proof().leaf == test::to_prt(pts.back()));
}

TEST_CASE("halting program repeats its last state hash") {
    auto s = assemble("LOADI r1, 1\nLOADI r2, 2\nLOADI r3, 3\nHALT");
    auto c = build_commitment(s, 0, 8, 0);
    for (std::uint64_t i = 3; i < c.leaf_count(); ++i) {
        CHECK(c.leaf(i) == c.leaf(3));
    }
    CHECK(c.leaf(2) != c.leaf(3));
    CHECK(c.leaf(3) == state_hash(run(s, 8).state));
}

TEST_CASE("single interval commitment") {
    auto s = assemble_file(test::program_path("fib.asm"));
    auto c = build_commitment(s, 0, 32, 5);
    CHECK(c.intervals() == 1);
    CHECK(c.leaf_count() == 2);
    CHECK(c.root() == hash_pair(state_hash(s), state_hash(run(s, 32).state)));
}

TEST_CASE("sparse leaves equal the dense leaves at the stride") {
    auto s = assemble_file(test::program_path("checksum.asm"));
    auto dense = build_commitment(s, 0, 256, 0);
    for (unsigned g : {1u, 3u, 5u}) {
        auto sparse = build_commitment(s, 0, 256, g);
        for (std::uint64_t i = 0; i <= sparse.end_index(); ++i) {
            CHECK(sparse.leaf(i) == dense.leaf(i << g));
            CHECK(sparse.step_of_leaf(i) == (i << g));
        }
    }
}

TEST_CASE("refinement: an inner commitment bridges two outer leaves") {
    auto s = assemble_file(test::program_path("checksum.asm"));
    auto outer = build_commitment(s, 0, 1024, 5);
    const std::uint64_t a = 7;
    auto at = run(s, (a - 1) << 5).state;
    auto inner = build_commitment(at, (a - 1) << 5, 32, 0);
    CHECK(inner.initial_leaf_proof().leaf == outer.leaf(a - 1));
    CHECK(inner.final_leaf_proof().leaf == outer.leaf(a));
}

TEST_CASE("every leaf proof verifies and tampering fails") {
    auto s = assemble_file(test::program_path("fib.asm"));
    auto c = build_commitment(s, 0, 4, 0);
    REQUIRE(c.leaf_count() == 8);
    for (std::uint64_t i = 0; i < 8; ++i) {
        auto b = c.leaf_with_proof(i);
        CHECK(b.verifies(c.root()));
        auto bad = b;
        bad.leaf[0] ^= 1;
        CHECK_FALSE(bad.verifies(c.root()));
        auto wrong_index = b;
        wrong_index.index ^= 1;
        if (c.leaf(i) != c.leaf(i ^ 1)) {
            CHECK_FALSE(wrong_index.verifies(c.root()));
        }
    }
    CHECK(c.leaf_with_proof(0) == c.initial_leaf_proof());
    CHECK_THROWS(c.leaf_with_proof(8));

    auto first = c.initial_leaf_proof();
    CHECK(first.leaf == state_hash(s));
    hash h = first.leaf;
    for (const auto &q : first.siblings) {
        h = hash_pair(h, q);
    }
    CHECK(h == c.root());

    auto corrupted = s;
    corrupted[register_address(4)] = 1;
    auto bad = build_commitment(corrupted, 0, 4, 0);
    CHECK(bad.initial_leaf_proof().leaf != state_hash(s));
}

TEST_CASE("sparse build hashes far fewer states than dense") {
    auto s = assemble_file(test::program_path("checksum.asm"));
    effort_meter dense_meter;
    effort_meter sparse_meter;
    {
        effort_scope scope{&dense_meter};
        build_commitment(s, 0, 1 << 12, 0);
    }
    {
        effort_scope scope{&sparse_meter};
        build_commitment(s, 0, 1 << 12, 6);
    }
    CHECK(dense_meter.state_hashes == (1 << 12) + 1);
    CHECK(sparse_meter.state_hashes == (1 << 6) + 1);
    CHECK(dense_meter.commitment_hashes == dense_meter.hashes);
}

TEST_CASE("announcement wire round trip") {
    auto s = assemble_file(test::program_path("sum.asm"));
    auto a = announce(build_commitment(s, 64, 64, 3));
    bytes out;
    encode_announcement(a, out);
    CHECK(out.size() == 8 + 8 + 1 + 32 + 32 + 8 + 1 + 32 * 4);
    std::size_t off = 0;
    auto back = decode_announcement(out, off);
    REQUIRE(back.has_value());
    CHECK(*back == a);
    CHECK(off == out.size());
}
