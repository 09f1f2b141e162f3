#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qokt/bitvec.hpp"

namespace qokt {

using Bit = std::uint8_t;

// Thrown when ingested GF(2) constraints fix the same functional to two
// different parities. Simulations never hit this: constraints are sampled
// from true bits.
class ContradictionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parity constraint: the XOR of the bits at `indices` equals `parity`.
// The fast knowledge model accepts arity 1 and 2 only; the span oracle
// accepts any arity.
struct Constraint {
    std::vector<std::size_t> indices;
    Bit parity = 0;
};

class ParityKnowledge;

// Mutable union-find with parity over bit indices plus one virtual constant
// node, so "value known" is simply "linked to the constant". Used while
// ingesting constraints and by the multi-query adversary, which accumulates
// knowledge incrementally.
class KnowledgeBuilder {
public:
    explicit KnowledgeBuilder(std::size_t length);

    std::size_t length() const { return n_; }
    std::size_t known_count() const { return known_; }

    void add_known(std::size_t i, Bit value);
    void add_pair(std::size_t i, std::size_t j, Bit parity);
    void add(const Constraint& c);

    struct Class {
        enum Kind { known, grouped, solo } kind;
        Bit value = 0;           // known: the bit value; grouped: offset to root
        std::size_t root = 0;    // grouped: canonical component id
        std::size_t size = 0;    // grouped: component size
    };
    Class classify(std::size_t i) const;

    bool is_known(std::size_t i) const { return classify(i).kind == Class::known; }
    Bit known_value(std::size_t i) const;

    ParityKnowledge finalize() const;

private:
    std::size_t n_ = 0;
    std::size_t known_ = 0;
    // parent/offset are mutated by path halving during lookups.
    mutable std::vector<uint32_t> parent_;
    mutable std::vector<uint8_t> offset_;  // parity between node and parent
    std::vector<uint32_t> size_;

    std::size_t const_node() const { return n_; }
    std::pair<std::size_t, Bit> find(std::size_t i) const;
    void link(std::size_t i, std::size_t j, Bit parity);
};

// Alice's partial view of a bit string: a set of known values plus a
// partition of some unknown indices into parity-linked groups (each member
// carries its offset relative to the group's first member). Immutable after
// construction; operations return new values.
class ParityKnowledge {
public:
    ParityKnowledge() = default;
    explicit ParityKnowledge(std::size_t length);

    static ParityKnowledge from_constraints(std::size_t length, std::span<const Constraint> cs);
    // Singleton-only knowledge: values at the masked positions are known.
    static ParityKnowledge singletons(const BitVec& known_mask, const BitVec& values);

    std::size_t length() const { return n_; }

    bool is_known(std::size_t i) const { return known_mask_.get(i); }
    Bit known_value(std::size_t i) const { return static_cast<Bit>(known_val_.get(i)); }
    std::size_t known_count() const { return known_count_; }
    const BitVec& known_mask() const { return known_mask_; }

    bool is_grouped(std::size_t i) const { return gid_[i] >= 0; }
    int32_t group_id(std::size_t i) const { return gid_[i]; }
    Bit group_offset(std::size_t i) const { return static_cast<Bit>(goff_.get(i)); }
    std::size_t group_count() const { return gsize_.size(); }
    std::size_t grouped_count() const { return grouped_count_; }

    struct Group {
        std::vector<std::size_t> members;  // ascending
        std::vector<Bit> offsets;          // relative to members.front()
    };
    std::vector<Group> groups() const;

    // XOR of bits i and j when it is determined (both known, or same group).
    std::optional<Bit> pair_parity(std::size_t i, std::size_t j) const;
    bool pair_determined(std::size_t i, std::size_t j) const;

    // Index relabeling i -> (i + s) mod length.
    ParityKnowledge shifted(long long s) const;

    // Knowledge about the XOR of two independent strings: a position is
    // known iff known on both sides, and a pair is linked iff its XOR is
    // determined on both sides.
    static ParityKnowledge combined(const ParityKnowledge& a, const ParityKnowledge& b);

    // Concatenation, relabeling each part's indices past the previous parts.
    static ParityKnowledge concatenated(std::span<const ParityKnowledge> parts);

    // Restriction to a subset of positions (ascending); groups keep only the
    // pairs fully inside the subset, and groups reduced to one member
    // dissolve.
    ParityKnowledge selected(std::span<const std::size_t> positions) const;

    bool consistent_with(const BitVec& truth) const;

    // Per-index class labels: 0 unknown, 1 known, 2 parity-correlated.
    std::vector<uint8_t> classification() const;

    bool operator==(const ParityKnowledge& o) const;

private:
    std::size_t n_ = 0;
    std::size_t known_count_ = 0;
    std::size_t grouped_count_ = 0;
    BitVec known_mask_;
    BitVec known_val_;
    std::vector<int32_t> gid_;   // -1 when not grouped
    BitVec goff_;                // offset to the group's first member
    std::vector<uint32_t> gsize_;

    // Renumbers groups by first member and re-bases offsets so that equal
    // knowledge always has an identical representation.
    void canonicalize();
    friend class KnowledgeBuilder;
};

ParityKnowledge knowledge_from_constraints(std::size_t length, std::span<const Constraint> cs);

// Ground-truth model for validating ParityKnowledge: constraint rows of any
// arity reduced by GF(2) elimination.
class LinearSpanOracle {
public:
    explicit LinearSpanOracle(std::size_t length) : n_(length) {}
    std::size_t length() const { return n_; }

    void add(const Constraint& c);
    void add_mask(BitVec mask, Bit parity);

    std::optional<Bit> value_of(BitVec mask) const;
    std::optional<Bit> value_of_index(std::size_t i) const;
    std::optional<Bit> value_of_pair(std::size_t i, std::size_t j) const;

    std::size_t rank() const { return rows_.size(); }

private:
    std::size_t n_;
    // Rows kept with unique leading (lowest set) indices, ascending.
    std::vector<std::pair<BitVec, Bit>> rows_;
};

// An oblivious key: Bob's complete bit string plus Alice's partial view of it.
struct ObliviousKey {
    BitVec bits;
    ParityKnowledge knowledge;

    std::size_t length() const { return bits.size(); }
    bool consistent() const { return knowledge.consistent_with(bits); }
    bool operator==(const ObliviousKey&) const = default;
};

ObliviousKey combine_xor(const ObliviousKey& a, const ObliviousKey& b);
ObliviousKey cyclic_shift(const ObliviousKey& k, long long s);
ObliviousKey concat(std::span<const ObliviousKey> keys);

// True iff the pairwise model and the span model agree on which single
// indices and which pairwise sums are determined (and on their values).
bool oracle_equivalent(const ObliviousKey& k, const LinearSpanOracle& o);

}  // namespace qokt
