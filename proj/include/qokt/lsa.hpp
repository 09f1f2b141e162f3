#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qokt/knowledge.hpp"
#include "qokt/rng.hpp"

namespace qokt {

// Shifts claimed during low-shift-and-addition, one per substring.
struct ShiftPlan {
    std::vector<long long> shifts;
    std::optional<std::size_t> target_index;  // 0-based, when honest targeting is used
};

struct LsaStep {
    std::size_t k = 0;           // substrings folded so far
    std::size_t known = 0;       // n_k
    std::size_t correlated = 0;  // m_k: indices belonging to any parity group
};

struct LsaTrace {
    std::vector<LsaStep> steps;
    bool converged = true;  // false when the fold hit its step cutoff
    // Per-step index classes (0 unknown / 1 known / 2 correlated), recorded
    // only on request.
    std::vector<std::vector<uint8_t>> snapshots;

    std::size_t final_k() const { return steps.empty() ? 0 : steps.back().k; }
    std::size_t final_known() const { return steps.empty() ? 0 : steps.back().known; }
    // First k with n_k <= target, or 0 when never reached.
    std::size_t first_k_reaching(std::size_t target) const;
};

// Simulations abort as non-converged after this many additions; all
// parameter ranges of interest converge far below it.
inline constexpr std::size_t kMaxFoldSteps = 64;

struct FoldOptions {
    std::size_t stop = 1;                      // fold until known count <= stop
    std::size_t max_steps = kMaxFoldSteps;
    bool snapshots = false;
};

using KeySource = std::function<ObliviousKey()>;

struct FoldOutcome {
    ObliviousKey final_key;
    ShiftPlan plan;
    LsaTrace trace;
};

// Removes every l-bit block with no Alice-known bit. Returns the surviving
// key and the fraction of blocks discarded. The raw length must be a
// multiple of l; an empty result is legal and means the caller needs more
// raw key.
std::pair<ObliviousKey, double> block_sift(const ObliviousKey& raw, std::size_t l);

// A shift s with |s| <= l-1 such that index `target` is known after
// cyclic_shift(sub, s); uniform among the qualifying shifts. Throws
// std::logic_error when none exists (callers must block-sift first).
long long honest_shift_for(const ObliviousKey& sub, std::size_t target, std::size_t l, Rng& rng);

// Honest low-shift-and-addition over a fixed set of substrings: each
// substring is cyclically shifted so the target stays known, then all are
// XOR-folded.
FoldOutcome lsa_honest(std::span<const ObliviousKey> substrings, std::size_t target,
                       std::size_t l, Rng& rng);

// Honest fold drawing substrings until the known count reaches stop.
FoldOutcome lsa_honest_converge(const KeySource& source, std::size_t target, std::size_t l,
                                const FoldOptions& opt, Rng& rng);

// Adversarial fold: each step picks the low shift that keeps the most known
// bits (both shifts are searched jointly for the first two substrings). Ties
// prefer the smaller |shift|, negative first, and lexicographic pair order
// in the joint step.
FoldOutcome lsa_malicious_greedy(const KeySource& source, std::size_t l, const FoldOptions& opt,
                                 Rng& rng);

// Adversarial fold of a user who still completes her query: every claimed
// shift must keep the chosen target index known, and the known-bit count is
// maximized among those qualifying shifts. This is the strongest behaviour a
// retrieving user has, and the regime the convergence tables describe.
FoldOutcome lsa_malicious_targeted(const KeySource& source, std::size_t target, std::size_t l,
                                   const FoldOptions& opt, Rng& rng);

enum class ShiftRange { full, low };

// Comparison baseline: shifts drawn uniformly from {0..N-1} (full) or
// {-(l-1)..l-1} (low) with no optimization.
FoldOutcome shift_add_random(const KeySource& source, ShiftRange range, std::size_t l,
                             const FoldOptions& opt, Rng& rng);

// Adversarial fold with the shift searched over the whole string length,
// the regime unrestricted shift-addition postprocessing ends up in.
FoldOutcome shift_add_greedy_full(const KeySource& source, const FoldOptions& opt, Rng& rng);

// Closed-form single-query statistics of the k-fold XOR postprocessing with
// per-bit knowledge probability p: expected known final bits and the
// probability that none survives.
struct JProtocolStats {
    double expected_known = 0;
    double failure_prob = 0;
};
JProtocolStats jprotocol_stats(double n, double p, unsigned k);

// Failure probability of a protocol that must succeed in two independent
// runs with per-run failure probabilities f1 and f2.
double double_run_failure(double f1, double f2);

}  // namespace qokt
