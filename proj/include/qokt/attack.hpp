#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qokt/protocol.hpp"

namespace qokt {

// How the adversary places each query's knowledge pattern.
enum class AddressPolicy { optimal, random };

// Cross-query accumulator of what a multiphoton-reporting Alice has pinned
// down about the database. Knowledge grows by GF(2) closure, never by
// heuristic counting.
class AdversaryState {
public:
    explicit AdversaryState(std::size_t n) : know_(n) {}

    std::size_t db_size() const { return know_.length(); }
    std::size_t determined() const { return know_.known_count(); }
    std::size_t query_count() const { return queries_; }
    const KnowledgeBuilder& knowledge() const { return know_; }

    // Newly determined database bits if the key-space pattern were placed at
    // claimed shift delta. Pure lookup; the state is not changed.
    std::size_t gain(std::span<const Constraint> pattern, std::size_t delta) const;

    // Ingest one query's outcome: pattern constraints translated by delta,
    // with parities corrected through the ciphertext.
    void ingest(std::span<const Constraint> pattern, std::size_t delta, const BitVec& ciphertext);

    // Alice's reconstruction; positions she has not determined read 0.
    BitVec reconstruction() const;

private:
    KnowledgeBuilder know_;
    std::size_t queries_ = 0;
};

// The claimed shift maximizing the newly determined count; ties fall to the
// smallest shift.
std::size_t choose_query(const AdversaryState& state, std::span<const Constraint> pattern,
                         std::size_t n);

struct AttackResult {
    std::size_t queries = 0;
    bool completed = false;           // all n bits determined before the cutoff
    bool exact = false;               // reconstruction equals the true database
    std::vector<std::size_t> growth;  // determined count after each query
};

// Full database recovery against the original protocol under a weak-coherent
// source with multiphoton reporting. Aborts at cutoff_factor * n queries.
AttackResult run_recovery(std::size_t n, const SourceParams& source, AddressPolicy policy,
                          Rng& rng, std::size_t cutoff_factor = 10);

}  // namespace qokt
