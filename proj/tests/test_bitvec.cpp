#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qokt/bitvec.hpp"
#include "qokt/rng.hpp"

using namespace qokt;

TEST_CASE("set/get/count round trip") {
    BitVec v(130);
    v.set(0, true);
    v.set(64, true);
    v.set(129, true);
    CHECK(v.count() == 3);
    CHECK(v.get(64));
    CHECK_FALSE(v.get(63));
    v.set(64, false);
    CHECK(v.count() == 2);
    CHECK(v.lowest_set() == 0);
}

TEST_CASE("string round trip") {
    const std::string s = "0110100011";
    CHECK(BitVec::from_string(s).to_string() == s);
}

TEST_CASE("rotation matches the per-bit definition") {
    Rng rng(11);
    for (std::size_t n : {1u, 2u, 5u, 63u, 64u, 65u, 200u, 1000u}) {
        const BitVec v = random_bits(n, rng);
        for (long long s : {0ll, 1ll, -1ll, 7ll, static_cast<long long>(n) - 1,
                            static_cast<long long>(3 * n + 5)}) {
            const BitVec r = v.rotated(s);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(r.get(mod_index(static_cast<long long>(i) + s, n)) == v.get(i));
        }
    }
}

TEST_CASE("rotation composes to identity") {
    Rng rng(12);
    const BitVec v = random_bits(777, rng);
    CHECK(v.rotated(123).rotated(-123) == v);
}

TEST_CASE("rotated overlap counts aligned pairs") {
    Rng rng(13);
    for (std::size_t n : {3u, 64u, 100u, 517u}) {
        const BitVec a = random_bits(n, rng);
        const BitVec b = random_bits(n, rng);
        const RotatedOverlap ov(b);
        for (long long d : {0ll, 1ll, -1ll, 17ll, static_cast<long long>(n - 1)}) {
            std::size_t want = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (a.get(i) && b.get(mod_index(static_cast<long long>(i) - d, n))) ++want;
            CHECK(ov.count(a, d) == want);
            CHECK(overlap_rotated(a, b, d) == want);
        }
    }
}

TEST_CASE("xor and and are bitwise") {
    Rng rng(14);
    const BitVec a = random_bits(99, rng);
    const BitVec b = random_bits(99, rng);
    const BitVec x = a ^ b;
    const BitVec m = a & b;
    for (std::size_t i = 0; i < 99; ++i) {
        CHECK(x.get(i) == (a.get(i) ^ b.get(i)));
        CHECK(m.get(i) == (a.get(i) && b.get(i)));
    }
}
