#pragma once

#include <optional>
#include <vector>

#include "qokt/knowledge.hpp"
#include "qokt/rng.hpp"

namespace qokt {

// A phase-modulated pulse train: phase 0 <-> bit 0, phase pi <-> bit 1.
// A train of l+1 pulses carries an l-bit key block.
struct PulseTrain {
    BitVec phases;  // s_0 ... s_l
    std::size_t block_len() const { return phases.size() - 1; }
};

enum class SourceKind { ideal_single_photon, weak_coherent };

// honest: announce any detection (m >= 1, resend on m = 0);
// malicious_multiphoton: claim a detection only when m >= 2.
enum class Reporting { honest, malicious_multiphoton };

struct SourceParams {
    SourceKind kind = SourceKind::ideal_single_photon;
    double mu = 0.1;  // mean photon number, weak-coherent only
    Reporting reporting = Reporting::honest;

    static SourceParams ideal() { return {}; }
    static SourceParams wcs(double mu, Reporting reporting = Reporting::honest) {
        return {SourceKind::weak_coherent, mu, reporting};
    }
    void validate() const;
};

// One interference measurement of a pulse train: the receiver applies a
// single optical delay r to the whole train and reads off phase differences
// s_j xor s_{(j+r) mod (l+1)} at the detected pulse positions j.
struct MeasurementOutcome {
    std::size_t shift_r = 1;               // in {1, ..., l}
    std::vector<std::size_t> detections;   // distinct pulse indices, ascending
    std::size_t announced_t = 0;           // published index, one of detections
};

PulseTrain gen_train(std::size_t l, Rng& rng);

// Ideal source: exactly one detection. Weak-coherent: the photon count is
// Poisson(mu) and the reporting rule decides acceptance; all photons of one
// train land at distinct positions (the receiver's best case). Returns
// nullopt when the reporting rule rejects the train.
std::optional<MeasurementOutcome> measure(const PulseTrain& train, const SourceParams& params,
                                          Rng& rng);

// Alice's raw constraints over the l key-bit positions implied by the
// measurement. Differences involving the announced pulse t reduce to known
// key bits; all others are pairwise parities.
std::vector<Constraint> measurement_constraints(const PulseTrain& train,
                                                const MeasurementOutcome& out);

// Bob's bits of the block key defined by the announcement t: for every pulse
// u != t, in ascending u order, the key bit s_t xor s_u.
BitVec key_bits_from_train(const PulseTrain& train, std::size_t announced_t);

ObliviousKey block_key_from_measurement(const PulseTrain& train, const MeasurementOutcome& out);

// Discard-and-resend loop: regenerate trains until the reporting rule
// accepts one, then return the resulting l-bit block key. `discarded`, when
// given, accumulates the number of rejected trains.
ObliviousKey sample_block_key(std::size_t l, const SourceParams& params, Rng& rng,
                              std::size_t* discarded = nullptr,
                              std::size_t* announced_t = nullptr);

// Generic oblivious-key source: Bob knows everything, Alice knows each bit
// independently with probability p.
ObliviousKey gen_generic_raw_key(std::size_t n, double p, Rng& rng);

}  // namespace qokt
