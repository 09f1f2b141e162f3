#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qokt/lsa.hpp"
#include "qokt/sources.hpp"

namespace qokt {

enum class Variant { original, improved, generic };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

// One bit per item. The improved and generic variants pad with zero bits at
// the end so the length divides the block length.
struct Database {
    BitVec items;
    std::size_t size() const { return items.size(); }
    static Database random(std::size_t n, Rng& rng) { return {random_bits(n, rng)}; }
};

struct SessionConfig {
    Variant variant = Variant::improved;
    std::size_t n = 8;        // database size before padding
    std::size_t l = 4;        // block length (improved/generic)
    std::size_t k = 3;        // number of substrings folded
    std::size_t address = 1;  // wanted item, 1-based
    SourceParams source;      // original/improved
    double p = 0.25;          // generic per-bit known probability
    uint64_t seed = 1;

    void validate() const;
};

struct RecoveredItem {
    std::size_t address = 0;  // 1-based
    Bit value = 0;
};

struct ParityGroupRecord {
    std::vector<std::size_t> addresses;  // 1-based, ascending
    std::vector<Bit> offsets;            // relative to the first address
};

// What Alice could determine from this session, counted over her final-key
// view. known_addresses and parity groups are restricted to real (unpadded)
// items.
struct KnowledgeAccounting {
    std::size_t final_known = 0;       // known final-key bits, padding included
    std::size_t final_correlated = 0;  // parity-correlated final-key bits
    std::vector<std::size_t> known_addresses;  // 1-based decodable items
    std::vector<ParityGroupRecord> parity_groups;
    bool full_knowledge = false;  // every final-key bit known (degenerate)
};

struct ProtocolTranscript {
    SessionConfig config;
    std::size_t padded_n = 0;
    BitVec database;  // ground truth, kept for simulation audits
    std::vector<std::size_t> announced_t;  // one entry per accepted train
    std::size_t discarded_trains = 0;      // no-detection discards
    std::size_t discarded_blocks = 0;      // generic sifting
    double discard_fraction = 0.0;
    ShiftPlan plan;
    BitVec ciphertext;  // padded_n bits
    std::vector<RecoveredItem> recovered;
    KnowledgeAccounting accounting;
    LsaTrace trace;

    std::string to_json_line() const;  // one line-delimited record
};

// One-time pad: bitwise XOR of the items with Bob's final-key bits.
BitVec encrypt_database(const Database& db, const ObliviousKey& final_key);

ProtocolTranscript run_original(const SessionConfig& cfg);
ProtocolTranscript run_improved(const SessionConfig& cfg);
ProtocolTranscript run_generic(const SessionConfig& cfg);
ProtocolTranscript run_session(const SessionConfig& cfg);

// Generic-model raw key provisioning: sift blocks out of fresh raw key until
// `blocks` survive, trimming any excess. Tracks totals for the discard
// statistics.
ObliviousKey provision_sifted_key(std::size_t blocks, std::size_t l, double p, Rng& rng,
                                  std::size_t* total_blocks = nullptr,
                                  std::size_t* total_discarded = nullptr);

}  // namespace qokt
