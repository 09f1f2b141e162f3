#include "qokt/lsa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qokt {

std::size_t LsaTrace::first_k_reaching(std::size_t target) const {
    for (const auto& s : steps)
        if (s.known <= target) return s.k;
    return 0;
}

std::pair<ObliviousKey, double> block_sift(const ObliviousKey& raw, std::size_t l) {
    if (l < 1) throw std::invalid_argument("block length must be >= 1");
    if (raw.length() % l != 0) throw std::invalid_argument("raw length must be a multiple of l");
    const std::size_t blocks = raw.length() / l;
    std::vector<std::size_t> keep;
    keep.reserve(raw.length());
    std::size_t discarded = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        bool has_known = false;
        for (std::size_t i = b * l; i < (b + 1) * l && !has_known; ++i)
            has_known = raw.knowledge.is_known(i);
        if (!has_known) {
            ++discarded;
            continue;
        }
        for (std::size_t i = b * l; i < (b + 1) * l; ++i) keep.push_back(i);
    }
    BitVec bits(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) bits.set(j, raw.bits.get(keep[j]));
    ObliviousKey sifted{std::move(bits), raw.knowledge.selected(keep)};
    const double frac = blocks == 0 ? 0.0 : static_cast<double>(discarded) / blocks;
    return {std::move(sifted), frac};
}

long long honest_shift_for(const ObliviousKey& sub, std::size_t target, std::size_t l, Rng& rng) {
    const std::size_t n = sub.length();
    if (target >= n) throw std::invalid_argument("target out of range");
    std::vector<long long> candidates;
    for (long long s = -(static_cast<long long>(l) - 1); s <= static_cast<long long>(l) - 1; ++s)
        if (sub.knowledge.is_known(mod_index(static_cast<long long>(target) - s, n)))
            candidates.push_back(s);
    if (candidates.empty())
        throw std::logic_error("no qualifying low shift; input was not block-sifted");
    return candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
}

namespace {

void record_step(LsaTrace& trace, const ObliviousKey& cur, bool snapshot) {
    trace.steps.push_back(
        {trace.steps.size() + 1, cur.knowledge.known_count(), cur.knowledge.grouped_count()});
    if (snapshot) trace.snapshots.push_back(cur.knowledge.classification());
}

// Low shifts in tie-break order: 0, -1, 1, -2, 2, ...
std::vector<long long> low_shift_order(std::size_t l) {
    std::vector<long long> order{0};
    for (long long s = 1; s <= static_cast<long long>(l) - 1; ++s) {
        order.push_back(-s);
        order.push_back(s);
    }
    return order;
}

// Known-bit count of combine_xor(cur, cyclic_shift(next, s)) without
// materializing it: the output knowns are exactly the aligned known pairs.
std::size_t survivors(const RotatedOverlap& next_known, const BitVec& cur_known, long long s) {
    return next_known.count(cur_known, s);
}

FoldOutcome greedy_fold(const KeySource& source, std::span<const long long> order,
                        bool full_range, const FoldOptions& opt) {
    FoldOutcome out;
    ObliviousKey first = source();
    const std::size_t n = first.length();

    if (opt.max_steps > 1 && first.knowledge.known_count() > opt.stop) {
        // Both shifts of the first two substrings are searched jointly. The
        // survivor count depends only on s2 - s1, so counts are cached per
        // delta and the pairs walked in tie-break order.
        ObliviousKey second = source();
        const RotatedOverlap second_known(second.knowledge.known_mask());
        long long best1 = 0, best2 = 0;
        std::size_t best = 0;
        if (full_range) {
            // Every delta is reachable with s1 = 0, and (0, delta) is the
            // lexicographically first pair realizing it.
            bool have = false;
            for (long long d = 0; d < static_cast<long long>(n); ++d) {
                const std::size_t c = survivors(second_known, first.knowledge.known_mask(), d);
                if (!have || c > best) {
                    have = true;
                    best = c;
                    best2 = d;
                }
            }
        } else {
            const long long span = order.back() < 0 ? -order.back() : order.back();
            std::vector<std::size_t> by_delta(static_cast<std::size_t>(4 * span + 1));
            for (long long d = -2 * span; d <= 2 * span; ++d)
                by_delta[static_cast<std::size_t>(d + 2 * span)] =
                    survivors(second_known, first.knowledge.known_mask(), d);
            bool have = false;
            for (long long s1 : order)
                for (long long s2 : order) {
                    const std::size_t c = by_delta[static_cast<std::size_t>(s2 - s1 + 2 * span)];
                    if (!have || c > best) {
                        have = true;
                        best = c;
                        best1 = s1;
                        best2 = s2;
                    }
                }
        }
        ObliviousKey shifted_first = cyclic_shift(first, best1);
        out.plan.shifts.push_back(best1);
        record_step(out.trace, shifted_first, opt.snapshots);
        ObliviousKey combined = combine_xor(shifted_first, cyclic_shift(second, best2));
        out.plan.shifts.push_back(best2);
        record_step(out.trace, combined, opt.snapshots);
        first = std::move(combined);
    } else {
        out.plan.shifts.push_back(0);
        record_step(out.trace, first, opt.snapshots);
    }

    ObliviousKey cur = std::move(first);
    while (cur.knowledge.known_count() > opt.stop) {
        if (out.trace.steps.size() >= opt.max_steps) {
            out.trace.converged = false;
            break;
        }
        ObliviousKey next = source();
        if (next.length() != n) throw std::invalid_argument("substring length mismatch");
        const RotatedOverlap next_known(next.knowledge.known_mask());
        long long best_s = order.front();
        std::size_t best = 0;
        bool have = false;
        for (long long s : order) {
            const std::size_t c = survivors(next_known, cur.knowledge.known_mask(), s);
            if (!have || c > best) {
                have = true;
                best = c;
                best_s = s;
            }
        }
        cur = combine_xor(cur, cyclic_shift(next, best_s));
        out.plan.shifts.push_back(best_s);
        record_step(out.trace, cur, opt.snapshots);
    }
    out.final_key = std::move(cur);
    return out;
}

}  // namespace

FoldOutcome lsa_honest(std::span<const ObliviousKey> substrings, std::size_t target,
                       std::size_t l, Rng& rng) {
    if (substrings.empty()) throw std::invalid_argument("need at least one substring");
    FoldOutcome out;
    out.plan.target_index = target;
    ObliviousKey cur;
    for (const auto& sub : substrings) {
        const long long s = honest_shift_for(sub, target, l, rng);
        out.plan.shifts.push_back(s);
        ObliviousKey shifted = cyclic_shift(sub, s);
        cur = cur.length() == 0 ? std::move(shifted) : combine_xor(cur, shifted);
        record_step(out.trace, cur, false);
    }
    out.final_key = std::move(cur);
    return out;
}

FoldOutcome lsa_honest_converge(const KeySource& source, std::size_t target, std::size_t l,
                                const FoldOptions& opt, Rng& rng) {
    FoldOutcome out;
    out.plan.target_index = target;
    ObliviousKey cur;
    for (;;) {
        if (cur.length() != 0 && cur.knowledge.known_count() <= opt.stop) break;
        if (out.trace.steps.size() >= opt.max_steps) {
            out.trace.converged = false;
            break;
        }
        ObliviousKey next = source();
        const long long s = honest_shift_for(next, target, l, rng);
        out.plan.shifts.push_back(s);
        ObliviousKey shifted = cyclic_shift(next, s);
        cur = cur.length() == 0 ? std::move(shifted) : combine_xor(cur, shifted);
        record_step(out.trace, cur, opt.snapshots);
    }
    out.final_key = std::move(cur);
    return out;
}

FoldOutcome lsa_malicious_greedy(const KeySource& source, std::size_t l, const FoldOptions& opt,
                                 Rng&) {
    const auto order = low_shift_order(l);
    return greedy_fold(source, order, /*full_range=*/false, opt);
}

FoldOutcome shift_add_random(const KeySource& source, ShiftRange range, std::size_t l,
                             const FoldOptions& opt, Rng& rng) {
    FoldOutcome out;
    ObliviousKey cur;
    for (;;) {
        if (cur.length() != 0 && cur.knowledge.known_count() <= opt.stop) break;
        if (out.trace.steps.size() >= opt.max_steps) {
            out.trace.converged = false;
            break;
        }
        ObliviousKey next = source();
        const long long s =
            range == ShiftRange::full
                ? static_cast<long long>(rng.below(next.length()))
                : rng.range(-(static_cast<long long>(l) - 1), static_cast<long long>(l) - 1);
        out.plan.shifts.push_back(s);
        ObliviousKey shifted = cyclic_shift(next, s);
        cur = cur.length() == 0 ? std::move(shifted) : combine_xor(cur, shifted);
        record_step(out.trace, cur, opt.snapshots);
    }
    out.final_key = std::move(cur);
    return out;
}

FoldOutcome shift_add_greedy_full(const KeySource& source, const FoldOptions& opt, Rng&) {
    // Candidate shifts 0..N-1; the length is only known once the first
    // substring arrives, so wrap the source to capture it.
    ObliviousKey first = source();
    const std::size_t n = first.length();
    std::vector<long long> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<long long>(i);
    bool first_pending = true;
    const KeySource wrapped = [&]() -> ObliviousKey {
        if (first_pending) {
            first_pending = false;
            return std::move(first);
        }
        return source();
    };
    return greedy_fold(wrapped, order, /*full_range=*/true, opt);
}

JProtocolStats jprotocol_stats(double n, double p, unsigned k) {
    if (n < 1 || !(p > 0.0) || !(p < 1.0) || k < 1)
        throw std::invalid_argument("jprotocol_stats parameter out of range");
    const double pk = std::pow(p, static_cast<double>(k));
    return {n * pk, std::exp(n * std::log1p(-pk))};
}

double double_run_failure(double f1, double f2) {
    if (f1 < 0 || f1 > 1 || f2 < 0 || f2 > 1)
        throw std::invalid_argument("failure probabilities must lie in [0,1]");
    return 1.0 - (1.0 - f1) * (1.0 - f2);
}

}  // namespace qokt
