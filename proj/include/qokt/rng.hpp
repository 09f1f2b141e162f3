#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "qokt/bitvec.hpp"

namespace qokt {

// SplitMix64 finalizer, used for seed derivation.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Per-run seeds: mix the master seed with a stream id and a run index so that
// any run can be reproduced in isolation and run order never matters.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t run) {
    return mix64(mix64(mix64(master) ^ stream) ^ run);
}

// FNV-1a over a label, for naming experiment streams.
inline uint64_t hash_label(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

// Simulation RNG. All bounded sampling is implemented here so results do not
// depend on standard-library distribution internals, only on the engine.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(mix64(seed)) {}

    uint64_t u64() { return eng_(); }

    double unit() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    bool bit() {
        if (cached_ == 0) {
            word_ = u64();
            cached_ = 64;
        }
        const bool b = word_ & 1u;
        word_ >>= 1;
        --cached_;
        return b;
    }

    bool bernoulli(double p) { return unit() < p; }

    // Uniform in [0, n), n >= 1. Lemire rejection keeps it exactly uniform.
    uint64_t below(uint64_t n) {
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            const unsigned __int128 m = static_cast<unsigned __int128>(u64()) * n;
            if (static_cast<uint64_t>(m) >= threshold) return static_cast<uint64_t>(m >> 64);
        }
    }

    // Uniform integer in [lo, hi], inclusive.
    long long range(long long lo, long long hi) {
        return lo + static_cast<long long>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Knuth's product method; adequate for the small means used here.
    unsigned poisson(double mu) {
        const double limit = std::exp(-mu);
        unsigned k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= unit();
        } while (prod > limit);
        return k - 1;
    }

private:
    std::mt19937_64 eng_;
    uint64_t word_ = 0;
    unsigned cached_ = 0;
};

// n uniform random bits, drawn word-at-a-time.
inline BitVec random_bits(std::size_t n, Rng& rng) {
    BitVec v(n);
    for (auto& w : v.words()) w = rng.u64();
    v.mask_tail();
    return v;
}

// m distinct values from [0, n), ascending.
std::vector<std::size_t> sample_distinct_sorted(Rng& rng, std::size_t n, std::size_t m);

}  // namespace qokt
