#include "qokt/attack.hpp"

#include <algorithm>
#include <stdexcept>

namespace qokt {

namespace {

// Local union-find over the handful of knowledge classes one pattern
// placement touches, mirroring exactly what ingestion would merge.
struct LocalMerge {
    // node 0 is the anchor (known values); nodes are added per distinct
    // class/solo index.
    std::vector<std::size_t> parent{0};
    std::vector<std::size_t> weight{0};       // undetermined bits the node carries
    std::vector<uint64_t> keys{0};            // class identity, anchor uses key 0
    std::vector<std::size_t> gain_if_anchored{0};

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    std::size_t node_for(uint64_t key, std::size_t w) {
        for (std::size_t i = 1; i < keys.size(); ++i)
            if (keys[i] == key) return i;
        keys.push_back(key);
        parent.push_back(parent.size());
        weight.push_back(w);
        return parent.size() - 1;
    }

    std::size_t gained = 0;

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b == 0) std::swap(a, b);
        if (a == 0) gained += weight[b];  // b's bits become known
        parent[b] = a;
        weight[a] += weight[b];
    }
};

// Distinct node key for an index's class in the accumulated knowledge.
uint64_t class_key(const KnowledgeBuilder::Class& c, std::size_t idx, std::size_t n) {
    switch (c.kind) {
        case KnowledgeBuilder::Class::known: return 0;
        case KnowledgeBuilder::Class::grouped: return 1 + static_cast<uint64_t>(c.root);
        case KnowledgeBuilder::Class::solo: return 1 + static_cast<uint64_t>(n) + idx;
    }
    return 0;
}

}  // namespace

std::size_t AdversaryState::gain(std::span<const Constraint> pattern, std::size_t delta) const {
    const std::size_t n = know_.length();
    LocalMerge merge;
    auto local = [&](std::size_t key_index) {
        const std::size_t idx = (key_index + delta) % n;
        const auto c = know_.classify(idx);
        if (c.kind == KnowledgeBuilder::Class::known) return std::size_t{0};
        const std::size_t w = c.kind == KnowledgeBuilder::Class::grouped ? c.size : 1;
        return merge.node_for(class_key(c, idx, n), w);
    };
    for (const auto& c : pattern) {
        if (c.indices.size() == 1) {
            merge.unite(0, local(c.indices[0]));
        } else {
            merge.unite(local(c.indices[0]), local(c.indices[1]));
        }
    }
    return merge.gained;
}

void AdversaryState::ingest(std::span<const Constraint> pattern, std::size_t delta,
                            const BitVec& ciphertext) {
    const std::size_t n = know_.length();
    if (ciphertext.size() != n) throw std::invalid_argument("ciphertext length mismatch");
    for (const auto& c : pattern) {
        if (c.indices.size() == 1) {
            const std::size_t a = (c.indices[0] + delta) % n;
            know_.add_known(a, static_cast<Bit>(c.parity ^ ciphertext.get(a)));
        } else {
            const std::size_t a = (c.indices[0] + delta) % n;
            const std::size_t b = (c.indices[1] + delta) % n;
            know_.add_pair(a, b,
                           static_cast<Bit>(c.parity ^ ciphertext.get(a) ^ ciphertext.get(b)));
        }
    }
    ++queries_;
}

BitVec AdversaryState::reconstruction() const {
    BitVec out(know_.length());
    for (std::size_t i = 0; i < know_.length(); ++i) {
        const auto c = know_.classify(i);
        if (c.kind == KnowledgeBuilder::Class::known) out.set(i, c.value != 0);
    }
    return out;
}

std::size_t choose_query(const AdversaryState& state, std::span<const Constraint> pattern,
                         std::size_t n) {
    std::size_t best_delta = 0, best = 0;
    for (std::size_t delta = 0; delta < n; ++delta) {
        const std::size_t g = state.gain(pattern, delta);
        if (g > best) {
            best = g;
            best_delta = delta;
        }
    }
    return best_delta;
}

AttackResult run_recovery(std::size_t n, const SourceParams& source, AddressPolicy policy,
                          Rng& rng, std::size_t cutoff_factor) {
    if (n < 1) throw std::invalid_argument("database must hold at least one item");
    SourceParams src = source;
    src.validate();
    const Database db = Database::random(n, rng);
    AdversaryState state(n);
    AttackResult res;
    const std::size_t cutoff = cutoff_factor * n;

    while (state.determined() < n) {
        if (state.query_count() >= cutoff) {
            res.completed = false;
            res.queries = state.query_count();
            res.exact = false;
            return res;
        }
        // One query of the original protocol, retrying discarded trains.
        PulseTrain train;
        std::optional<MeasurementOutcome> out;
        for (;;) {
            train = gen_train(n, rng);
            out = measure(train, src, rng);
            if (out) break;
        }
        const auto pattern = measurement_constraints(train, *out);
        const std::size_t delta = policy == AddressPolicy::optimal
                                      ? choose_query(state, pattern, n)
                                      : static_cast<std::size_t>(rng.below(n));
        const BitVec key_bits = key_bits_from_train(train, out->announced_t);
        const BitVec ciphertext = db.items ^ key_bits.rotated(static_cast<long long>(delta));
        state.ingest(pattern, delta, ciphertext);
        res.growth.push_back(state.determined());
    }
    res.queries = state.query_count();
    res.completed = true;
    res.exact = state.reconstruction() == db.items;
    return res;
}

}  // namespace qokt
