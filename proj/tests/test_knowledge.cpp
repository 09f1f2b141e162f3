#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "qokt/knowledge.hpp"
#include "qokt/rng.hpp"

using namespace qokt;

namespace {

ObliviousKey key_from(const std::string& bits, const std::vector<Constraint>& cs) {
    BitVec b = BitVec::from_string(bits);
    return ObliviousKey{b, knowledge_from_constraints(b.size(), cs)};
}

// Constraints consistent with hidden truth bits: arity 1 or 2, random support.
std::vector<Constraint> random_constraints(const BitVec& truth, std::size_t count, Rng& rng) {
    std::vector<Constraint> cs;
    const std::size_t n = truth.size();
    for (std::size_t c = 0; c < count; ++c) {
        if (rng.bit() || n < 2) {
            const auto i = static_cast<std::size_t>(rng.below(n));
            cs.push_back({{i}, static_cast<Bit>(truth.get(i))});
        } else {
            const auto ij = sample_distinct_sorted(rng, n, 2);
            cs.push_back({{ij[0], ij[1]}, static_cast<Bit>(truth.get(ij[0]) ^ truth.get(ij[1]))});
        }
    }
    return cs;
}

LinearSpanOracle oracle_from(std::size_t n, const std::vector<Constraint>& cs) {
    LinearSpanOracle o(n);
    for (const auto& c : cs) o.add(c);
    return o;
}

}  // namespace

TEST_CASE("singleton and pair constraints build known bits and one group") {
    const auto k = knowledge_from_constraints(6, std::vector<Constraint>{{{4}, 0}, {{3, 5}, 1}});
    CHECK(k.known_count() == 1);
    CHECK(k.is_known(4));
    CHECK(k.known_value(4) == 0);
    CHECK(k.group_count() == 1);
    const auto gs = k.groups();
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].members == std::vector<std::size_t>{3, 5});
    CHECK((gs[0].offsets[0] ^ gs[0].offsets[1]) == 1);
    CHECK(k.pair_parity(3, 5) == Bit{1});
    CHECK_FALSE(k.pair_determined(3, 4));
}

TEST_CASE("no constraints means no knowledge") {
    const auto k = knowledge_from_constraints(3, std::vector<Constraint>{});
    CHECK(k.known_count() == 0);
    CHECK(k.group_count() == 0);
    CHECK(k.grouped_count() == 0);
}

TEST_CASE("a known anchor promotes the whole chain") {
    const auto k = knowledge_from_constraints(
        4, std::vector<Constraint>{{{0, 1}, 1}, {{1, 2}, 0}, {{0}, 1}});
    CHECK(k.known_count() == 3);
    CHECK(k.known_value(0) == 1);
    CHECK(k.known_value(1) == 0);
    CHECK(k.known_value(2) == 0);
    CHECK(k.group_count() == 0);
}

TEST_CASE("contradictions are rejected loudly") {
    CHECK_THROWS_AS(knowledge_from_constraints(
                        3, std::vector<Constraint>{{{1}, 0}, {{1}, 1}}),
                    ContradictionError);
    CHECK_THROWS_AS(knowledge_from_constraints(
                        3, std::vector<Constraint>{{{0, 1}, 0}, {{0, 1}, 1}}),
                    ContradictionError);
    // Cycle with odd parity.
    CHECK_THROWS_AS(knowledge_from_constraints(
                        3, std::vector<Constraint>{{{0, 1}, 1}, {{1, 2}, 1}, {{0, 2}, 1}}),
                    ContradictionError);
    // Arity 3 belongs to the span oracle, not the pairwise model.
    CHECK_THROWS_AS(knowledge_from_constraints(4, std::vector<Constraint>{{{0, 1, 2}, 0}}),
                    std::invalid_argument);
}

TEST_CASE("combine keeps aligned known bits") {
    const auto a = key_from("00100", {{{2}, 1}});
    const auto b = key_from("00110", {{{2}, 1}});
    const auto c = combine_xor(a, b);
    CHECK(c.knowledge.known_count() == 1);
    CHECK(c.knowledge.is_known(2));
    CHECK(c.knowledge.known_value(2) == 0);
    CHECK(c.consistent());
}

TEST_CASE("combine turns known+group against all-known into a group") {
    // Left side: bit 4 known, parity of 3 and 5 known. Right side: 3, 4, 5
    // known individually.
    const auto a = key_from("000101", {{{4}, 0}, {{3, 5}, 1}});
    const auto b = key_from("110010", {{{3}, 0}, {{4}, 1}, {{5}, 1}});
    const auto c = combine_xor(a, b);
    CHECK(c.knowledge.known_count() == 1);
    CHECK(c.knowledge.is_known(4));
    const auto gs = c.knowledge.groups();
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].members == std::vector<std::size_t>{3, 5});
    CHECK(c.consistent());
    CHECK(c.knowledge.pair_parity(3, 5) ==
          Bit{(a.bits.get(3) ^ a.bits.get(5) ^ b.bits.get(3) ^ b.bits.get(5)) != 0});
}

TEST_CASE("combine drops pairs undetermined on one side") {
    const auto a = key_from("000101", {{{4}, 0}, {{3, 5}, 1}});
    const auto b = key_from("110010", {{{4}, 1}});
    const auto c = combine_xor(a, b);
    CHECK(c.knowledge.known_count() == 1);
    CHECK(c.knowledge.is_known(4));
    CHECK(c.knowledge.group_count() == 0);
    CHECK(c.consistent());
}

TEST_CASE("combine rejects mismatched lengths") {
    const auto a = key_from("01", {});
    const auto b = key_from("011", {});
    CHECK_THROWS_AS(combine_xor(a, b), std::invalid_argument);
}

TEST_CASE("known count of a combine never exceeds the aligned overlap") {
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.below(12));
        const BitVec ta = random_bits(n, rng), tb = random_bits(n, rng);
        const ObliviousKey a{ta, knowledge_from_constraints(
                                     n, random_constraints(ta, rng.below(6), rng))};
        const ObliviousKey b{tb, knowledge_from_constraints(
                                     n, random_constraints(tb, rng.below(6), rng))};
        const auto c = combine_xor(a, b);
        CHECK(c.knowledge.known_count() ==
              (a.knowledge.known_mask() & b.knowledge.known_mask()).count());
        CHECK(c.consistent());
    }
}

TEST_CASE("cyclic shift relabels bits and knowledge together") {
    const auto k = key_from("00000100", {{{5}, 1}});
    SUBCASE("identity") { CHECK(cyclic_shift(k, 0) == k); }
    SUBCASE("forward by one") {
        const auto s = cyclic_shift(k, 1);
        CHECK(s.knowledge.is_known(6));
        CHECK(s.knowledge.known_count() == 1);
        CHECK(s.bits.get(6));
        CHECK(s.consistent());
    }
}

TEST_CASE("cyclic shift wraps around") {
    const auto k = key_from("0001", {{{3}, 1}});
    const auto s = cyclic_shift(k, 2);
    CHECK(s.knowledge.is_known(1));
    CHECK(s.bits.get(1));
}

TEST_CASE("shift then unshift is exact, knowledge included") {
    Rng rng(22);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 3 + static_cast<std::size_t>(rng.below(40));
        const BitVec truth = random_bits(n, rng);
        const ObliviousKey k{truth, knowledge_from_constraints(
                                        n, random_constraints(truth, rng.below(8), rng))};
        const long long s = rng.range(-static_cast<long long>(n) + 1,
                                      static_cast<long long>(n) - 1);
        CHECK(cyclic_shift(cyclic_shift(k, s), -s) == k);
    }
}

TEST_CASE("empty knowledge matches the empty oracle") {
    const auto k = key_from("0000", {});
    CHECK(oracle_equivalent(k, LinearSpanOracle(4)));
}

TEST_CASE("pairwise model matches the span oracle on the two-photon example") {
    const std::vector<Constraint> cs{{{4}, 0}, {{3, 5}, 1}};
    const auto k = key_from("000101", cs);
    CHECK(oracle_equivalent(k, oracle_from(6, cs)));
}

TEST_CASE("pairwise model matches the span oracle on random instances") {
    Rng rng(23);
    for (int t = 0; t < 3000; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(11));
        const BitVec truth = random_bits(n, rng);
        const auto cs = random_constraints(truth, rng.below(6), rng);
        const ObliviousKey k{truth, knowledge_from_constraints(n, cs)};
        CHECK(k.consistent());
        CHECK(oracle_equivalent(k, oracle_from(n, cs)));
    }
}

TEST_CASE("span oracle flags contradictions like the pairwise model") {
    LinearSpanOracle o(3);
    o.add({{0, 1}, 1});
    o.add({{1, 2}, 1});
    CHECK_THROWS_AS(o.add({{0, 2}, 1}), ContradictionError);
}

TEST_CASE("span oracle handles arity-3 rows") {
    LinearSpanOracle o(4);
    o.add({{0, 1, 2}, 1});
    o.add({{0}, 1});
    o.add({{1}, 1});
    CHECK(o.value_of_index(2) == Bit{1});
    CHECK_FALSE(o.value_of_index(3).has_value());
}

TEST_CASE("concatenation keeps knowledge aligned to its piece") {
    const auto a = key_from("01", {{{0}, 0}});
    const auto b = key_from("10", {{{0, 1}, 1}});
    std::vector<ObliviousKey> parts{a, b};
    const auto c = concat(parts);
    CHECK(c.length() == 4);
    CHECK(c.knowledge.is_known(0));
    CHECK(c.knowledge.pair_parity(2, 3) == Bit{1});
    CHECK(c.consistent());
    CHECK(c.bits.to_string() == "0110");
}

TEST_CASE("selection keeps fully contained groups and drops the rest") {
    const auto k = knowledge_from_constraints(
        6, std::vector<Constraint>{{{0}, 1}, {{1, 2}, 1}, {{3, 4}, 0}});
    const std::vector<std::size_t> keep{0, 1, 2, 3};
    const auto sel = k.selected(keep);
    CHECK(sel.length() == 4);
    CHECK(sel.is_known(0));
    CHECK(sel.pair_parity(1, 2) == Bit{1});
    // 3's partner was dropped, so its group dissolves.
    CHECK_FALSE(sel.is_grouped(3));
    CHECK(sel.group_count() == 1);
}
