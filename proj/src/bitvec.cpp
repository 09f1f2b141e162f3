#include "qokt/bitvec.hpp"

#include <bit>
#include <stdexcept>

namespace qokt {

std::size_t BitVec::count() const {
    std::size_t c = 0;
    for (uint64_t w : w_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool BitVec::any() const {
    for (uint64_t w : w_)
        if (w) return true;
    return false;
}

std::size_t BitVec::lowest_set() const {
    for (std::size_t k = 0; k < w_.size(); ++k)
        if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
    return n_;
}

BitVec& BitVec::operator^=(const BitVec& o) {
    if (o.n_ != n_) throw std::invalid_argument("BitVec length mismatch");
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
    return *this;
}

BitVec& BitVec::operator&=(const BitVec& o) {
    if (o.n_ != n_) throw std::invalid_argument("BitVec length mismatch");
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
    return *this;
}

void BitVec::mask_tail() {
    const std::size_t tail = n_ & 63;
    if (tail && !w_.empty()) w_.back() &= (uint64_t{1} << tail) - 1;
}

namespace {

// OR the n-bit payload of src into dst starting at bit position at.
void or_into(std::vector<uint64_t>& dst, const std::vector<uint64_t>& src, std::size_t nbits,
             std::size_t at) {
    const std::size_t nw = BitVec::words_for(nbits);
    for (std::size_t k = 0; k < nw; ++k) {
        const std::size_t pos = at + k * 64;
        const std::size_t word = pos >> 6, off = pos & 63;
        dst[word] |= src[k] << off;
        if (off) dst[word + 1] |= src[k] >> (64 - off);
    }
}

uint64_t read64_at(const std::vector<uint64_t>& w, std::size_t pos) {
    const std::size_t word = pos >> 6, off = pos & 63;
    uint64_t r = w[word] >> off;
    if (off) r |= w[word + 1] << (64 - off);
    return r;
}

}  // namespace

BitVec BitVec::rotated(long long s) const {
    if (n_ <= 1) return *this;
    const std::size_t sh = mod_index(s, n_);
    if (sh == 0) return *this;
    if (n_ < 64) {
        BitVec out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            if (get(i)) out.set((i + sh) % n_, true);
        return out;
    }
    // Doubled buffer removes the wrap at n: bit j of the result is bit
    // (j - sh) mod n of the source, a contiguous window in the doubled copy.
    std::vector<uint64_t> doubled(words_for(2 * n_) + 1, 0);
    or_into(doubled, w_, n_, 0);
    or_into(doubled, w_, n_, n_);
    BitVec out(n_);
    for (std::size_t k = 0; k < out.w_.size(); ++k)
        out.w_[k] = read64_at(doubled, mod_index(static_cast<long long>(k * 64) -
                                                     static_cast<long long>(sh),
                                                 n_));
    out.mask_tail();
    return out;
}

std::string BitVec::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitVec BitVec::from_string(const std::string& s) {
    BitVec v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("bit string expects 0/1");
        v.set(i, s[i] == '1');
    }
    return v;
}

RotatedOverlap::RotatedOverlap(const BitVec& b)
    : n_(b.size()), doubled_(BitVec::words_for(2 * b.size()) + 2, 0) {
    or_into(doubled_, b.words(), n_, 0);
    or_into(doubled_, b.words(), n_, n_);
}

uint64_t RotatedOverlap::read64(std::size_t pos) const { return read64_at(doubled_, pos); }

std::size_t RotatedOverlap::count(const BitVec& a, long long delta) const {
    if (a.size() != n_) throw std::invalid_argument("RotatedOverlap length mismatch");
    if (n_ == 0) return 0;
    if (n_ < 64) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < n_; ++i)
            if (a.get(i) && ((doubled_[0] >> mod_index(static_cast<long long>(i) - delta, n_)) & 1u))
                ++c;
        return c;
    }
    std::size_t c = 0;
    const auto& aw = a.words();
    for (std::size_t k = 0; k < aw.size(); ++k) {
        if (!aw[k]) continue;
        const std::size_t pos =
            mod_index(static_cast<long long>(k * 64) - delta, n_);
        c += static_cast<std::size_t>(std::popcount(aw[k] & read64(pos)));
    }
    return c;
}

std::size_t overlap_rotated(const BitVec& a, const BitVec& b, long long delta) {
    return RotatedOverlap(b).count(a, delta);
}

}  // namespace qokt
