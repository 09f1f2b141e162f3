#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qokt {

// Reduces a possibly negative position to [0, n).
inline std::size_t mod_index(long long i, std::size_t n) {
    long long m = static_cast<long long>(n);
    long long r = i % m;
    return static_cast<std::size_t>(r < 0 ? r + m : r);
}

// Fixed-length bit vector backed by 64-bit words. Bit 0 lives in the least
// significant bit of word 0; bits past size() in the last word are kept zero.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n) : n_(n), w_(words_for(n), 0) {}

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        const uint64_t m = uint64_t{1} << (i & 63);
        if (v)
            w_[i >> 6] |= m;
        else
            w_[i >> 6] &= ~m;
    }
    void flip(std::size_t i) { w_[i >> 6] ^= uint64_t{1} << (i & 63); }

    std::size_t count() const;
    bool any() const;
    // Smallest set index, or size() when empty.
    std::size_t lowest_set() const;

    BitVec& operator^=(const BitVec& o);
    BitVec& operator&=(const BitVec& o);
    friend BitVec operator^(BitVec a, const BitVec& b) { a ^= b; return a; }
    friend BitVec operator&(BitVec a, const BitVec& b) { a &= b; return a; }
    bool operator==(const BitVec&) const = default;

    // Cyclic rotation: bit i of *this becomes bit (i + s) mod n of the result.
    BitVec rotated(long long s) const;

    std::string to_string() const;  // index 0 first, '0'/'1'
    static BitVec from_string(const std::string& s);

    const std::vector<uint64_t>& words() const { return w_; }
    std::vector<uint64_t>& words() { return w_; }
    void mask_tail();

    static std::size_t words_for(std::size_t n) { return (n + 63) / 64; }

private:
    std::size_t n_ = 0;
    std::vector<uint64_t> w_;
};

// Precomputed doubled copy of one vector so that the overlap with another
// vector can be counted at many rotations without re-copying.
class RotatedOverlap {
public:
    explicit RotatedOverlap(const BitVec& b);
    // |{i : a[i] and b[(i - delta) mod n]}|; a must have the same length as b.
    std::size_t count(const BitVec& a, long long delta) const;
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<uint64_t> doubled_;
    uint64_t read64(std::size_t pos) const;
};

// One-shot form of RotatedOverlap::count.
std::size_t overlap_rotated(const BitVec& a, const BitVec& b, long long delta);

}  // namespace qokt
