#include "qokt/sources.hpp"

#include <algorithm>
#include <stdexcept>

namespace qokt {

void SourceParams::validate() const {
    if (kind == SourceKind::weak_coherent && !(mu > 0))
        throw std::invalid_argument("weak-coherent source needs mu > 0");
    if (kind == SourceKind::ideal_single_photon && reporting == Reporting::malicious_multiphoton)
        throw std::invalid_argument("multiphoton reporting needs a weak-coherent source");
}

PulseTrain gen_train(std::size_t l, Rng& rng) {
    if (l < 1) throw std::invalid_argument("pulse train needs l >= 1");
    return PulseTrain{random_bits(l + 1, rng)};
}

namespace {

// Photon-count draw plus the reporting rule; acceptance never depends on the
// train content.
std::optional<std::size_t> accepted_photon_count(const SourceParams& params, std::size_t l,
                                                 Rng& rng) {
    if (params.kind == SourceKind::ideal_single_photon) return 1;
    const std::size_t m = rng.poisson(params.mu);
    const std::size_t need = params.reporting == Reporting::malicious_multiphoton ? 2 : 1;
    if (m < need) return std::nullopt;
    return std::min(m, l + 1);
}

MeasurementOutcome measure_with_count(std::size_t l, std::size_t m, Rng& rng) {
    MeasurementOutcome out;
    out.shift_r = 1 + static_cast<std::size_t>(rng.below(l));
    out.detections = sample_distinct_sorted(rng, l + 1, m);
    out.announced_t = out.detections[static_cast<std::size_t>(rng.below(m))];
    return out;
}

}  // namespace

std::optional<MeasurementOutcome> measure(const PulseTrain& train, const SourceParams& params,
                                          Rng& rng) {
    params.validate();
    const std::size_t l = train.block_len();
    const auto m = accepted_photon_count(params, l, rng);
    if (!m) return std::nullopt;
    return measure_with_count(l, *m, rng);
}

namespace {

// Key-bit position of pulse u when pulse t is announced (t itself carries no
// key bit).
std::size_t key_pos(std::size_t u, std::size_t t) { return u < t ? u : u - 1; }

}  // namespace

std::vector<Constraint> measurement_constraints(const PulseTrain& train,
                                                const MeasurementOutcome& out) {
    if (out.detections.empty()) throw std::invalid_argument("measurement without detections");
    if (std::find(out.detections.begin(), out.detections.end(), out.announced_t) ==
        out.detections.end())
        throw std::invalid_argument("announcement must be a detected pulse");
    const std::size_t l = train.block_len();
    const std::size_t t = out.announced_t;
    std::vector<Constraint> cs;
    cs.reserve(out.detections.size());
    for (std::size_t j : out.detections) {
        const std::size_t j2 = (j + out.shift_r) % (l + 1);
        const Bit value = static_cast<Bit>(train.phases.get(j) ^ train.phases.get(j2));
        if (j == t)
            cs.push_back({{key_pos(j2, t)}, value});
        else if (j2 == t)
            cs.push_back({{key_pos(j, t)}, value});
        else
            cs.push_back({{key_pos(j, t), key_pos(j2, t)}, value});
    }
    return cs;
}

BitVec key_bits_from_train(const PulseTrain& train, std::size_t announced_t) {
    const std::size_t l = train.block_len();
    BitVec bits(l);
    const bool st = train.phases.get(announced_t);
    for (std::size_t u = 0; u <= l; ++u) {
        if (u == announced_t) continue;
        bits.set(key_pos(u, announced_t), st ^ train.phases.get(u));
    }
    return bits;
}

ObliviousKey block_key_from_measurement(const PulseTrain& train, const MeasurementOutcome& out) {
    const auto cs = measurement_constraints(train, out);
    return ObliviousKey{key_bits_from_train(train, out.announced_t),
                        knowledge_from_constraints(train.block_len(), cs)};
}

ObliviousKey sample_block_key(std::size_t l, const SourceParams& params, Rng& rng,
                              std::size_t* discarded, std::size_t* announced_t) {
    params.validate();
    for (;;) {
        const auto m = accepted_photon_count(params, l, rng);
        if (!m) {
            if (discarded) ++*discarded;
            continue;
        }
        const PulseTrain train = gen_train(l, rng);
        const MeasurementOutcome out = measure_with_count(l, *m, rng);
        if (announced_t) *announced_t = out.announced_t;
        return block_key_from_measurement(train, out);
    }
}

ObliviousKey gen_generic_raw_key(std::size_t n, double p, Rng& rng) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("known probability must be in (0,1)");
    BitVec bits = random_bits(n, rng);
    BitVec mask(n);
    for (std::size_t i = 0; i < n; ++i)
        if (rng.bernoulli(p)) mask.set(i, true);
    return ObliviousKey{bits, ParityKnowledge::singletons(mask, bits)};
}

}  // namespace qokt
