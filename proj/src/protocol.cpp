#include "qokt/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qokt {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::original: return "original";
        case Variant::improved: return "improved";
        case Variant::generic: return "generic";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "original") return Variant::original;
    if (s == "improved") return Variant::improved;
    if (s == "generic") return Variant::generic;
    throw std::invalid_argument("unknown protocol variant: " + s);
}

void SessionConfig::validate() const {
    if (n < 1) throw std::invalid_argument("database must hold at least one item");
    if (address < 1 || address > n) throw std::invalid_argument("address out of range");
    if (variant != Variant::original) {
        if (l < 2) throw std::invalid_argument("block length must be >= 2");
        if (k < 1) throw std::invalid_argument("need at least one substring");
    }
    if (variant == Variant::generic) {
        if (!(p > 0.0) || !(p < 1.0))
            throw std::invalid_argument("known probability must be in (0,1)");
    } else {
        source.validate();
    }
}

BitVec encrypt_database(const Database& db, const ObliviousKey& final_key) {
    if (db.size() != final_key.length())
        throw std::invalid_argument("database/key length mismatch");
    return db.items ^ final_key.bits;
}

namespace {

// Accounting over Alice's final-key view. Addresses are 1-based; padded
// positions (>= n_orig) never show up as decodable items or group members.
KnowledgeAccounting account(const ParityKnowledge& view, const BitVec& ciphertext,
                            std::size_t n_orig) {
    KnowledgeAccounting acc;
    acc.final_known = view.known_count();
    acc.final_correlated = view.grouped_count();
    acc.full_knowledge = view.known_count() == view.length();
    for (std::size_t i = 0; i < std::min(n_orig, view.length()); ++i)
        if (view.is_known(i)) acc.known_addresses.push_back(i + 1);
    for (const auto& g : view.groups()) {
        ParityGroupRecord rec;
        for (std::size_t m = 0; m < g.members.size(); ++m) {
            if (g.members[m] >= n_orig) continue;
            rec.addresses.push_back(g.members[m] + 1);
            rec.offsets.push_back(g.offsets[m]);
        }
        if (rec.addresses.size() < 2) continue;
        // Re-base offsets on the first surviving member, adding the
        // ciphertext so the parity refers to database items.
        const Bit base = rec.offsets.front();
        for (std::size_t m = 0; m < rec.addresses.size(); ++m) {
            const Bit key_off = static_cast<Bit>(rec.offsets[m] ^ base);
            const Bit ct = static_cast<Bit>(ciphertext.get(rec.addresses[m] - 1) ^
                                            ciphertext.get(rec.addresses.front() - 1));
            rec.offsets[m] = static_cast<Bit>(key_off ^ ct);
        }
        acc.parity_groups.push_back(std::move(rec));
    }
    return acc;
}

}  // namespace

ProtocolTranscript run_original(const SessionConfig& cfg) {
    cfg.validate();
    if (cfg.variant != Variant::original) throw std::invalid_argument("wrong variant");
    Rng rng(cfg.seed);
    const std::size_t n = cfg.n;
    const Database db = Database::random(n, rng);
    ProtocolTranscript tr;
    tr.config = cfg;
    tr.padded_n = n;
    tr.database = db.items;

    // One (n+1)-pulse train; a no-detection claim discards the train.
    PulseTrain train;
    std::optional<MeasurementOutcome> out;
    for (;;) {
        train = gen_train(n, rng);
        out = measure(train, cfg.source, rng);
        if (out) break;
        ++tr.discarded_trains;
    }
    tr.announced_t.push_back(out->announced_t);
    const ObliviousKey key = block_key_from_measurement(train, *out);

    // Alice picks one known key position j and claims the shift aligning it
    // with her wanted item.
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < n; ++i)
        if (key.knowledge.is_known(i)) known.push_back(i);
    const std::size_t j = known[static_cast<std::size_t>(rng.below(known.size()))];
    const std::size_t target = cfg.address - 1;
    const long long s =
        static_cast<long long>(mod_index(static_cast<long long>(target) - static_cast<long long>(j), n));
    tr.plan.shifts.push_back(s);
    tr.plan.target_index = target;

    const ObliviousKey shifted = cyclic_shift(key, s);
    tr.ciphertext = encrypt_database(db, shifted);
    const Bit item = static_cast<Bit>(tr.ciphertext.get(target) ^
                                      shifted.knowledge.known_value(target));
    tr.recovered.push_back({cfg.address, item});
    tr.accounting = account(shifted.knowledge, tr.ciphertext, n);
    tr.trace.steps.push_back(
        {1, shifted.knowledge.known_count(), shifted.knowledge.grouped_count()});
    return tr;
}

namespace {

Database padded(const Database& db, std::size_t l) {
    const std::size_t padded_n = (db.size() + l - 1) / l * l;
    BitVec items(padded_n);
    for (std::size_t i = 0; i < db.size(); ++i) items.set(i, db.items.get(i));
    return {std::move(items)};
}

void finish_with_lsa(ProtocolTranscript& tr, const Database& padded_db,
                     std::span<const ObliviousKey> subs, Rng& rng) {
    const SessionConfig& cfg = tr.config;
    const std::size_t target = cfg.address - 1;
    FoldOutcome fold = lsa_honest(subs, target, cfg.l, rng);
    tr.plan = fold.plan;
    tr.trace = fold.trace;
    tr.ciphertext = encrypt_database(padded_db, fold.final_key);
    const Bit item = static_cast<Bit>(tr.ciphertext.get(target) ^
                                      fold.final_key.knowledge.known_value(target));
    tr.recovered.push_back({cfg.address, item});
    tr.accounting = account(fold.final_key.knowledge, tr.ciphertext, cfg.n);
}

}  // namespace

ProtocolTranscript run_improved(const SessionConfig& cfg) {
    cfg.validate();
    if (cfg.variant != Variant::improved) throw std::invalid_argument("wrong variant");
    Rng rng(cfg.seed);
    const Database db = Database::random(cfg.n, rng);
    ProtocolTranscript tr;
    tr.config = cfg;
    tr.database = db.items;
    const Database pdb = padded(db, cfg.l);
    tr.padded_n = pdb.size();

    const std::size_t blocks_per_substring = pdb.size() / cfg.l;
    std::vector<ObliviousKey> subs;
    subs.reserve(cfg.k);
    for (std::size_t s = 0; s < cfg.k; ++s) {
        std::vector<ObliviousKey> blocks;
        blocks.reserve(blocks_per_substring);
        for (std::size_t b = 0; b < blocks_per_substring; ++b) {
            std::size_t announced = 0;
            blocks.push_back(sample_block_key(cfg.l, cfg.source, rng, &tr.discarded_trains,
                                              &announced));
            tr.announced_t.push_back(announced);
        }
        subs.push_back(concat(blocks));
    }
    finish_with_lsa(tr, pdb, subs, rng);
    return tr;
}

ObliviousKey provision_sifted_key(std::size_t blocks, std::size_t l, double p, Rng& rng,
                                  std::size_t* total_blocks, std::size_t* total_discarded) {
    const double keep_prob = 1.0 - std::pow(1.0 - p, static_cast<double>(l));
    std::vector<ObliviousKey> pieces;
    std::size_t have = 0;
    while (have < blocks) {
        const std::size_t missing = blocks - have;
        // Expected-discard provisioning with 10% headroom.
        const std::size_t want =
            static_cast<std::size_t>(std::ceil(static_cast<double>(missing) / keep_prob * 1.1)) + 1;
        const ObliviousKey raw = gen_generic_raw_key(want * l, p, rng);
        auto [sifted, frac] = block_sift(raw, l);
        (void)frac;
        const std::size_t kept = sifted.length() / l;
        if (total_blocks) *total_blocks += want;
        if (total_discarded) *total_discarded += want - kept;
        pieces.push_back(std::move(sifted));
        have += kept;
    }
    ObliviousKey key = concat(pieces);
    if (key.length() > blocks * l) {
        std::vector<std::size_t> keep(blocks * l);
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
        BitVec bits(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) bits.set(i, key.bits.get(i));
        key = ObliviousKey{std::move(bits), key.knowledge.selected(keep)};
    }
    return key;
}

ProtocolTranscript run_generic(const SessionConfig& cfg) {
    cfg.validate();
    if (cfg.variant != Variant::generic) throw std::invalid_argument("wrong variant");
    Rng rng(cfg.seed);
    const Database db = Database::random(cfg.n, rng);
    ProtocolTranscript tr;
    tr.config = cfg;
    tr.database = db.items;
    const Database pdb = padded(db, cfg.l);
    tr.padded_n = pdb.size();

    const std::size_t blocks_per_substring = pdb.size() / cfg.l;
    std::size_t total_blocks = 0;
    std::vector<ObliviousKey> subs;
    subs.reserve(cfg.k);
    for (std::size_t s = 0; s < cfg.k; ++s)
        subs.push_back(provision_sifted_key(blocks_per_substring, cfg.l, cfg.p, rng,
                                            &total_blocks, &tr.discarded_blocks));
    tr.discard_fraction =
        total_blocks == 0 ? 0.0 : static_cast<double>(tr.discarded_blocks) / total_blocks;
    finish_with_lsa(tr, pdb, subs, rng);
    return tr;
}

ProtocolTranscript run_session(const SessionConfig& cfg) {
    switch (cfg.variant) {
        case Variant::original: return run_original(cfg);
        case Variant::improved: return run_improved(cfg);
        case Variant::generic: return run_generic(cfg);
    }
    throw std::invalid_argument("unknown variant");
}

std::string ProtocolTranscript::to_json_line() const {
    nlohmann::json j;
    j["variant"] = to_string(config.variant);
    j["seed"] = config.seed;
    j["n"] = config.n;
    j["padded_n"] = padded_n;
    j["address"] = config.address;
    if (config.variant != Variant::original) {
        j["l"] = config.l;
        j["k"] = config.k;
    }
    if (config.variant == Variant::generic) {
        j["p"] = config.p;
        j["discarded_blocks"] = discarded_blocks;
        j["discard_fraction"] = discard_fraction;
    } else {
        j["source"] = config.source.kind == SourceKind::weak_coherent ? "wcs" : "ideal";
        if (config.source.kind == SourceKind::weak_coherent) {
            j["mu"] = config.source.mu;
            j["reporting"] = config.source.reporting == Reporting::malicious_multiphoton
                                 ? "malicious"
                                 : "honest";
        }
        j["announced_t"] = announced_t;
        j["discarded_trains"] = discarded_trains;
    }
    j["shifts"] = plan.shifts;
    j["database"] = database.to_string();
    j["ciphertext"] = ciphertext.to_string();
    auto& rec = j["recovered"] = nlohmann::json::array();
    for (const auto& r : recovered) rec.push_back({{"address", r.address}, {"value", r.value}});
    auto& acc = j["accounting"];
    acc["final_known"] = accounting.final_known;
    acc["final_correlated"] = accounting.final_correlated;
    acc["known_addresses"] = accounting.known_addresses;
    acc["full_knowledge"] = accounting.full_knowledge;
    auto& pg = acc["parity_groups"] = nlohmann::json::array();
    for (const auto& g : accounting.parity_groups) {
        nlohmann::json jg = nlohmann::json::array();
        for (std::size_t m = 0; m < g.addresses.size(); ++m)
            jg.push_back({{"address", g.addresses[m]}, {"offset", g.offsets[m]}});
        pg.push_back(std::move(jg));
    }
    auto& steps = j["trace"] = nlohmann::json::array();
    for (const auto& s : trace.steps)
        steps.push_back({{"k", s.k}, {"known", s.known}, {"correlated", s.correlated}});
    return j.dump();
}

}  // namespace qokt
