#include "qokt/knowledge.hpp"

#include <algorithm>
#include <unordered_map>

namespace qokt {

// ---------------------------------------------------------------------------
// KnowledgeBuilder

KnowledgeBuilder::KnowledgeBuilder(std::size_t length)
    : n_(length), parent_(length + 1), offset_(length + 1, 0), size_(length + 1, 1) {
    for (std::size_t i = 0; i <= length; ++i) parent_[i] = static_cast<uint32_t>(i);
}

std::pair<std::size_t, Bit> KnowledgeBuilder::find(std::size_t i) const {
    Bit off = 0;
    while (parent_[i] != i) {
        const std::size_t p = parent_[i];
        if (parent_[p] != p) {
            // Path halving; fold the grandparent offset in.
            offset_[i] ^= offset_[p];
            parent_[i] = parent_[p];
        }
        off ^= offset_[i];
        i = parent_[i];
    }
    return {i, off};
}

void KnowledgeBuilder::link(std::size_t i, std::size_t j, Bit parity) {
    auto [ri, oi] = find(i);
    auto [rj, oj] = find(j);
    if (ri == rj) {
        if (static_cast<Bit>(oi ^ oj) != parity)
            throw ContradictionError("inconsistent parity constraint");
        return;
    }
    // Keep the constant node a root so "known" stays O(1) to detect; else
    // union by size.
    if (rj == const_node() || (ri != const_node() && size_[ri] < size_[rj])) {
        std::swap(ri, rj);
        std::swap(oi, oj);
    }
    if (rj == const_node() || ri == const_node()) {
        // ri is the constant: everything in rj's component becomes known.
        known_ += size_[rj];
    }
    parent_[rj] = static_cast<uint32_t>(ri);
    offset_[rj] = static_cast<Bit>(oi ^ oj ^ parity);
    size_[ri] += size_[rj];
}

void KnowledgeBuilder::add_known(std::size_t i, Bit value) {
    if (i >= n_) throw std::invalid_argument("index out of range");
    link(i, const_node(), value);
}

void KnowledgeBuilder::add_pair(std::size_t i, std::size_t j, Bit parity) {
    if (i >= n_ || j >= n_) throw std::invalid_argument("index out of range");
    if (i == j) {
        if (parity != 0) throw ContradictionError("x xor x = 1");
        return;
    }
    link(i, j, parity);
}

void KnowledgeBuilder::add(const Constraint& c) {
    switch (c.indices.size()) {
        case 1:
            add_known(c.indices[0], c.parity);
            break;
        case 2:
            add_pair(c.indices[0], c.indices[1], c.parity);
            break;
        default:
            throw std::invalid_argument("pairwise knowledge accepts arity 1 or 2");
    }
}

KnowledgeBuilder::Class KnowledgeBuilder::classify(std::size_t i) const {
    auto [root, off] = find(i);
    Class c;
    if (root == const_node()) {
        c.kind = Class::known;
        c.value = off;
        return c;
    }
    if (size_[root] == 1) {
        c.kind = Class::solo;
        return c;
    }
    c.kind = Class::grouped;
    c.root = root;
    c.value = off;
    c.size = size_[root];
    return c;
}

Bit KnowledgeBuilder::known_value(std::size_t i) const {
    auto [root, off] = find(i);
    if (root != const_node()) throw std::logic_error("value of unknown index");
    return off;
}

ParityKnowledge KnowledgeBuilder::finalize() const {
    ParityKnowledge k(n_);
    std::unordered_map<std::size_t, int32_t> ids;
    for (std::size_t i = 0; i < n_; ++i) {
        const Class c = classify(i);
        switch (c.kind) {
            case Class::known:
                k.known_mask_.set(i, true);
                k.known_val_.set(i, c.value != 0);
                ++k.known_count_;
                break;
            case Class::grouped: {
                auto [it, fresh] = ids.try_emplace(c.root, static_cast<int32_t>(k.gsize_.size()));
                if (fresh) k.gsize_.push_back(0);
                k.gid_[i] = it->second;
                k.goff_.set(i, c.value != 0);
                ++k.gsize_[static_cast<std::size_t>(it->second)];
                ++k.grouped_count_;
                break;
            }
            case Class::solo:
                break;
        }
    }
    k.canonicalize();
    return k;
}

// ---------------------------------------------------------------------------
// ParityKnowledge

ParityKnowledge::ParityKnowledge(std::size_t length)
    : n_(length),
      known_mask_(length),
      known_val_(length),
      gid_(length, -1),
      goff_(length) {}

ParityKnowledge ParityKnowledge::from_constraints(std::size_t length,
                                                  std::span<const Constraint> cs) {
    KnowledgeBuilder b(length);
    for (const auto& c : cs) b.add(c);
    return b.finalize();
}

ParityKnowledge knowledge_from_constraints(std::size_t length, std::span<const Constraint> cs) {
    return ParityKnowledge::from_constraints(length, cs);
}

ParityKnowledge ParityKnowledge::singletons(const BitVec& known_mask, const BitVec& values) {
    if (known_mask.size() != values.size())
        throw std::invalid_argument("mask/value length mismatch");
    ParityKnowledge k(known_mask.size());
    k.known_mask_ = known_mask;
    k.known_val_ = values & known_mask;
    k.known_count_ = known_mask.count();
    return k;
}

void ParityKnowledge::canonicalize() {
    if (gsize_.empty()) return;
    std::vector<int32_t> remap(gsize_.size(), -1);
    std::vector<std::size_t> first(gsize_.size(), 0);
    std::vector<uint32_t> sizes;
    sizes.reserve(gsize_.size());
    int32_t next = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        const int32_t g = gid_[i];
        if (g < 0) continue;
        if (remap[static_cast<std::size_t>(g)] < 0) {
            remap[static_cast<std::size_t>(g)] = next++;
            first[static_cast<std::size_t>(g)] = i;
            sizes.push_back(gsize_[static_cast<std::size_t>(g)]);
        }
    }
    BitVec goff(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        const int32_t g = gid_[i];
        if (g < 0) continue;
        goff.set(i, goff_.get(i) ^ goff_.get(first[static_cast<std::size_t>(g)]));
        gid_[i] = remap[static_cast<std::size_t>(g)];
    }
    goff_ = std::move(goff);
    gsize_ = std::move(sizes);
}

std::vector<ParityKnowledge::Group> ParityKnowledge::groups() const {
    std::vector<Group> out(gsize_.size());
    for (std::size_t i = 0; i < n_; ++i) {
        const int32_t g = gid_[i];
        if (g < 0) continue;
        out[static_cast<std::size_t>(g)].members.push_back(i);
        out[static_cast<std::size_t>(g)].offsets.push_back(static_cast<Bit>(goff_.get(i)));
    }
    return out;
}

std::optional<Bit> ParityKnowledge::pair_parity(std::size_t i, std::size_t j) const {
    if (is_known(i) && is_known(j)) return static_cast<Bit>(known_value(i) ^ known_value(j));
    if (gid_[i] >= 0 && gid_[i] == gid_[j])
        return static_cast<Bit>(group_offset(i) ^ group_offset(j));
    return std::nullopt;
}

bool ParityKnowledge::pair_determined(std::size_t i, std::size_t j) const {
    return pair_parity(i, j).has_value();
}

ParityKnowledge ParityKnowledge::shifted(long long s) const {
    ParityKnowledge out(n_);
    if (n_ == 0) return out;
    out.known_mask_ = known_mask_.rotated(s);
    out.known_val_ = known_val_.rotated(s);
    out.goff_ = goff_.rotated(s);
    out.known_count_ = known_count_;
    out.grouped_count_ = grouped_count_;
    out.gsize_ = gsize_;
    for (std::size_t i = 0; i < n_; ++i)
        out.gid_[mod_index(static_cast<long long>(i) + s, n_)] = gid_[i];
    out.canonicalize();
    return out;
}

ParityKnowledge ParityKnowledge::combined(const ParityKnowledge& a, const ParityKnowledge& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("knowledge length mismatch");
    const std::size_t n = a.n_;
    ParityKnowledge out(n);
    out.known_mask_ = a.known_mask_ & b.known_mask_;
    out.known_val_ = (a.known_val_ ^ b.known_val_) & out.known_mask_;
    out.known_count_ = out.known_mask_.count();

    // For each side, indices fall into determinedness classes: all known
    // indices are mutually determined, each group is, and solo indices pair
    // with nothing. A pair is linked in the output iff its members share a
    // class on both sides; that relation is an equivalence, so bucketing by
    // the class pair yields the output groups directly.
    const uint64_t cols = static_cast<uint64_t>(b.gsize_.size()) + 1;
    std::unordered_map<uint64_t, int32_t> buckets;
    std::vector<std::size_t> bucket_first;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.known_mask_.get(i)) continue;
        uint64_t ca, cb;
        if (a.is_known(i))
            ca = 0;
        else if (a.gid_[i] >= 0)
            ca = 1 + static_cast<uint64_t>(a.gid_[i]);
        else
            continue;
        if (b.is_known(i))
            cb = 0;
        else if (b.gid_[i] >= 0)
            cb = 1 + static_cast<uint64_t>(b.gid_[i]);
        else
            continue;
        const uint64_t key = ca * cols + cb;
        auto [it, fresh] = buckets.try_emplace(key, static_cast<int32_t>(out.gsize_.size()));
        if (fresh) {
            out.gsize_.push_back(0);
            bucket_first.push_back(i);
        }
        const auto g = static_cast<std::size_t>(it->second);
        out.gid_[i] = it->second;
        const std::size_t f = bucket_first[g];
        const Bit da = a.is_known(i)
                           ? static_cast<Bit>(a.known_value(i) ^ a.known_value(f))
                           : static_cast<Bit>(a.group_offset(i) ^ a.group_offset(f));
        const Bit db = b.is_known(i)
                           ? static_cast<Bit>(b.known_value(i) ^ b.known_value(f))
                           : static_cast<Bit>(b.group_offset(i) ^ b.group_offset(f));
        out.goff_.set(i, (da ^ db) != 0);
        ++out.gsize_[g];
    }
    // Dissolve one-member buckets.
    bool dropped = false;
    for (std::size_t i = 0; i < n; ++i) {
        const int32_t g = out.gid_[i];
        if (g >= 0 && out.gsize_[static_cast<std::size_t>(g)] < 2) {
            out.gid_[i] = -1;
            out.goff_.set(i, false);
            dropped = true;
        }
    }
    if (dropped) {
        std::vector<uint32_t> gsize;
        std::vector<int32_t> remap(out.gsize_.size(), -1);
        for (std::size_t i = 0; i < n; ++i) {
            const int32_t g = out.gid_[i];
            if (g < 0) continue;
            if (remap[static_cast<std::size_t>(g)] < 0) {
                remap[static_cast<std::size_t>(g)] = static_cast<int32_t>(gsize.size());
                gsize.push_back(out.gsize_[static_cast<std::size_t>(g)]);
            }
            out.gid_[i] = remap[static_cast<std::size_t>(g)];
        }
        out.gsize_ = std::move(gsize);
    }
    out.grouped_count_ = 0;
    for (uint32_t s : out.gsize_) out.grouped_count_ += s;
    out.canonicalize();
    return out;
}

ParityKnowledge ParityKnowledge::concatenated(std::span<const ParityKnowledge> parts) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.n_;
    ParityKnowledge out(total);
    std::size_t at = 0;
    int32_t gshift = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p.n_; ++i) {
            const std::size_t j = at + i;
            if (p.is_known(i)) {
                out.known_mask_.set(j, true);
                out.known_val_.set(j, p.known_value(i) != 0);
            }
            out.gid_[j] = p.gid_[i] < 0 ? -1 : p.gid_[i] + gshift;
            out.goff_.set(j, p.goff_.get(i));
        }
        out.gsize_.insert(out.gsize_.end(), p.gsize_.begin(), p.gsize_.end());
        out.known_count_ += p.known_count_;
        out.grouped_count_ += p.grouped_count_;
        gshift += static_cast<int32_t>(p.gsize_.size());
        at += p.n_;
    }
    out.canonicalize();
    return out;
}

ParityKnowledge ParityKnowledge::selected(std::span<const std::size_t> positions) const {
    ParityKnowledge out(positions.size());
    std::vector<uint32_t> kept(gsize_.size(), 0);
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const std::size_t i = positions[j];
        if (is_known(i)) {
            out.known_mask_.set(j, true);
            out.known_val_.set(j, known_value(i) != 0);
            ++out.known_count_;
        } else if (gid_[i] >= 0) {
            out.gid_[j] = gid_[i];
            out.goff_.set(j, goff_.get(i));
            ++kept[static_cast<std::size_t>(gid_[i])];
        }
    }
    out.gsize_ = kept;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const int32_t g = out.gid_[j];
        if (g >= 0 && kept[static_cast<std::size_t>(g)] < 2) {
            out.gid_[j] = -1;
            out.goff_.set(j, false);
        }
    }
    std::vector<uint32_t> gsize;
    std::vector<int32_t> remap(gsize_.size(), -1);
    out.grouped_count_ = 0;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const int32_t g = out.gid_[j];
        if (g < 0) continue;
        if (remap[static_cast<std::size_t>(g)] < 0) {
            remap[static_cast<std::size_t>(g)] = static_cast<int32_t>(gsize.size());
            gsize.push_back(kept[static_cast<std::size_t>(g)]);
        }
        out.gid_[j] = remap[static_cast<std::size_t>(g)];
        ++out.grouped_count_;
    }
    out.gsize_ = std::move(gsize);
    out.canonicalize();
    return out;
}

bool ParityKnowledge::consistent_with(const BitVec& truth) const {
    if (truth.size() != n_) return false;
    std::vector<int32_t> first(gsize_.size(), -1);
    for (std::size_t i = 0; i < n_; ++i) {
        if (is_known(i) && known_value(i) != static_cast<Bit>(truth.get(i))) return false;
        const int32_t g = gid_[i];
        if (g < 0) continue;
        if (is_known(i)) return false;  // known and grouped must stay disjoint
        auto& f = first[static_cast<std::size_t>(g)];
        if (f < 0) {
            f = static_cast<int32_t>(i);
            if (goff_.get(i)) return false;  // canonical: first member offset 0
        } else {
            const bool want = truth.get(i) ^ truth.get(static_cast<std::size_t>(f));
            if (goff_.get(i) != want) return false;
        }
    }
    for (uint32_t s : gsize_)
        if (s < 2) return false;
    return true;
}

std::vector<uint8_t> ParityKnowledge::classification() const {
    std::vector<uint8_t> out(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        if (is_known(i))
            out[i] = 1;
        else if (gid_[i] >= 0)
            out[i] = 2;
    }
    return out;
}

bool ParityKnowledge::operator==(const ParityKnowledge& o) const {
    return n_ == o.n_ && known_mask_ == o.known_mask_ && known_val_ == o.known_val_ &&
           gid_ == o.gid_ && goff_ == o.goff_ && gsize_ == o.gsize_;
}

// ---------------------------------------------------------------------------
// LinearSpanOracle

void LinearSpanOracle::add(const Constraint& c) {
    BitVec mask(n_);
    for (std::size_t i : c.indices) {
        if (i >= n_) throw std::invalid_argument("index out of range");
        mask.flip(i);  // repeated indices cancel over GF(2)
    }
    add_mask(std::move(mask), c.parity);
}

void LinearSpanOracle::add_mask(BitVec mask, Bit parity) {
    for (const auto& [rmask, rparity] : rows_) {
        const std::size_t lead = rmask.lowest_set();
        if (mask.get(lead)) {
            mask ^= rmask;
            parity ^= rparity;
        }
    }
    if (!mask.any()) {
        if (parity) throw ContradictionError("inconsistent constraint row");
        return;
    }
    const std::size_t lead = mask.lowest_set();
    auto it = rows_.begin();
    while (it != rows_.end() && it->first.lowest_set() < lead) ++it;
    rows_.insert(it, {std::move(mask), parity});
}

std::optional<Bit> LinearSpanOracle::value_of(BitVec mask) const {
    Bit parity = 0;
    for (const auto& [rmask, rparity] : rows_) {
        if (mask.get(rmask.lowest_set())) {
            mask ^= rmask;
            parity ^= rparity;
        }
    }
    if (mask.any()) return std::nullopt;
    return parity;
}

std::optional<Bit> LinearSpanOracle::value_of_index(std::size_t i) const {
    BitVec m(n_);
    m.set(i, true);
    return value_of(std::move(m));
}

std::optional<Bit> LinearSpanOracle::value_of_pair(std::size_t i, std::size_t j) const {
    BitVec m(n_);
    m.set(i, true);
    m.flip(j);
    return value_of(std::move(m));
}

// ---------------------------------------------------------------------------
// ObliviousKey operations

ObliviousKey combine_xor(const ObliviousKey& a, const ObliviousKey& b) {
    if (a.length() != b.length()) throw std::invalid_argument("key length mismatch");
    return ObliviousKey{a.bits ^ b.bits, ParityKnowledge::combined(a.knowledge, b.knowledge)};
}

ObliviousKey cyclic_shift(const ObliviousKey& k, long long s) {
    return ObliviousKey{k.bits.rotated(s), k.knowledge.shifted(s)};
}

ObliviousKey concat(std::span<const ObliviousKey> keys) {
    std::size_t total = 0;
    for (const auto& k : keys) total += k.length();
    BitVec bits(total);
    std::vector<ParityKnowledge> views;
    views.reserve(keys.size());
    std::size_t at = 0;
    for (const auto& k : keys) {
        for (std::size_t i = 0; i < k.length(); ++i) bits.set(at + i, k.bits.get(i));
        views.push_back(k.knowledge);
        at += k.length();
    }
    return ObliviousKey{std::move(bits), ParityKnowledge::concatenated(views)};
}

bool oracle_equivalent(const ObliviousKey& k, const LinearSpanOracle& o) {
    const std::size_t n = k.length();
    if (o.length() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ov = o.value_of_index(i);
        if (ov.has_value() != k.knowledge.is_known(i)) return false;
        if (ov && *ov != k.knowledge.known_value(i)) return false;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto ov = o.value_of_pair(i, j);
            const auto pv = k.knowledge.pair_parity(i, j);
            if (ov.has_value() != pv.has_value()) return false;
            if (ov && *ov != *pv) return false;
        }
    return true;
}

}  // namespace qokt
