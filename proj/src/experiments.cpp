#include "qokt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <thread>

namespace qokt::experiments {

RunStats RunStats::of(std::vector<double> values, std::size_t nonconverged) {
    RunStats s;
    s.nonconverged = nonconverged;
    s.values = std::move(values);
    if (s.values.empty()) return s;
    s.minimum = s.maximum = s.values.front();
    double sum = 0;
    for (double v : s.values) {
        sum += v;
        s.minimum = std::min(s.minimum, v);
        s.maximum = std::max(s.maximum, v);
    }
    s.mean = sum / static_cast<double>(s.values.size());
    double sq = 0;
    for (double v : s.values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(s.values.size()));
    return s;
}

void parallel_runs(std::size_t runs, std::size_t threads,
                   const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, runs);
    if (threads <= 1) {
        for (std::size_t r = 0; r < runs; ++r) fn(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= runs) return;
                fn(r);
            }
        });
    for (auto& th : pool) th.join();
}

namespace {

std::size_t pad_to_blocks(std::size_t n, std::size_t l) { return (n + l - 1) / l * l; }

// N-bit substring of the improved protocol: one accepted train per l-bit
// block, concatenated.
ObliviousKey improved_substring(std::size_t n, std::size_t l, const SourceParams& src, Rng& rng) {
    std::vector<ObliviousKey> blocks;
    blocks.reserve(n / l);
    for (std::size_t b = 0; b < n / l; ++b) blocks.push_back(sample_block_key(l, src, rng));
    return concat(blocks);
}

}  // namespace

std::vector<Table1Cell> run_table1(const Table1Options& opt) {
    std::vector<Table1Cell> cells;
    for (std::size_t n_raw : opt.ns) {
        const std::size_t n = pad_to_blocks(n_raw, opt.l);
        Table1Cell cell;
        cell.n = n_raw;
        // Honest user: convergence of the known count to one targeted bit.
        // The honest run ignores parity information, so only the one known
        // bit per accepted block matters.
        {
            std::vector<double> ks(opt.runs, 0);
            std::atomic<std::size_t> bad{0};
            const uint64_t stream = hash_label("table1/honest") ^ n_raw;
            parallel_runs(opt.runs, opt.threads, [&](std::size_t r) {
                Rng rng(derive_seed(opt.seed, stream, r));
                const SourceParams src = SourceParams::wcs(opt.mu, Reporting::honest);
                const std::size_t target = static_cast<std::size_t>(rng.below(n));
                const auto fold = lsa_honest_converge(
                    [&] { return improved_substring(n, opt.l, src, rng); }, target, opt.l, {},
                    rng);
                if (!fold.trace.converged) ++bad;
                ks[r] = static_cast<double>(fold.trace.final_k());
            });
            cell.honest = RunStats::of(std::move(ks), bad);
        }
        // Malicious user: multiphoton reporting plus greedy shift selection.
        {
            std::vector<double> ks(opt.runs, 0);
            std::atomic<std::size_t> bad{0};
            const uint64_t stream = hash_label("table1/malicious") ^ n_raw;
            parallel_runs(opt.runs, opt.threads, [&](std::size_t r) {
                Rng rng(derive_seed(opt.seed, stream, r));
                const SourceParams src = SourceParams::wcs(opt.mu, Reporting::malicious_multiphoton);
                const auto fold = lsa_malicious_greedy(
                    [&] { return improved_substring(n, opt.l, src, rng); }, opt.l, {}, rng);
                if (!fold.trace.converged) ++bad;
                ks[r] = static_cast<double>(fold.trace.final_k());
            });
            cell.malicious = RunStats::of(std::move(ks), bad);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<Table2Cell> run_table2(const Table2Options& opt) {
    std::vector<Table2Cell> cells;
    for (std::size_t l : opt.ls) {
        const std::size_t n = pad_to_blocks(opt.n, l);
        Table2Cell cell;
        cell.l = l;
        cell.p_discard_analytic = std::pow(1.0 - opt.p, static_cast<double>(l));

        std::vector<std::vector<double>> ks(opt.na.size(),
                                            std::vector<double>(opt.runs, 0));
        std::vector<double> discards(opt.runs, 0);
        std::atomic<std::size_t> bad{0};
        const uint64_t stream = hash_label("table2") ^ l;
        parallel_runs(opt.runs, opt.threads, [&](std::size_t r) {
            Rng rng(derive_seed(opt.seed, stream, r));
            std::size_t total = 0, dropped = 0;
            const auto fold = lsa_malicious_greedy(
                [&] {
                    return provision_sifted_key(n / l, l, opt.p, rng, &total, &dropped);
                },
                l, {}, rng);
            if (!fold.trace.converged) ++bad;
            discards[r] = total ? static_cast<double>(dropped) / static_cast<double>(total) : 0.0;
            for (std::size_t a = 0; a < opt.na.size(); ++a)
                ks[a][r] = static_cast<double>(fold.trace.first_k_reaching(opt.na[a]));
        });
        double dsum = 0;
        for (double d : discards) dsum += d;
        cell.p_discard_empirical = dsum / static_cast<double>(opt.runs);
        for (std::size_t a = 0; a < opt.na.size(); ++a)
            cell.k_for_na[opt.na[a]] = RunStats::of(std::move(ks[a]), bad);
        cells.push_back(std::move(cell));
    }
    return cells;
}

Fig2Result run_fig2(const Fig2Options& opt) {
    const std::size_t n = pad_to_blocks(opt.n, opt.l);
    Rng rng(derive_seed(opt.seed, hash_label("fig2"), 0));
    const SourceParams src = SourceParams::wcs(opt.mu, Reporting::malicious_multiphoton);
    FoldOptions fopt;
    fopt.snapshots = true;
    const auto fold = lsa_malicious_greedy(
        [&] { return improved_substring(n, opt.l, src, rng); }, opt.l, fopt, rng);
    Fig2Result res;
    res.padded_n = n;
    res.trace = fold.trace;
    return res;
}

std::vector<Fig3Series> run_fig3(const Fig3Options& opt) {
    std::vector<Fig3Series> series;
    // Curve value once a run has converged to one known bit stays one: the
    // known count never increases and never drops below one.
    auto curve_of = [&](const LsaTrace& trace) {
        std::vector<double> c(opt.kmax, 1.0);
        for (std::size_t k = 0; k < opt.kmax; ++k) {
            if (k < trace.steps.size())
                c[k] = static_cast<double>(trace.steps[k].known);
            else if (!trace.converged && !trace.steps.empty())
                c[k] = static_cast<double>(trace.steps.back().known);
        }
        return c;
    };

    for (std::size_t l : opt.ls) {
        const std::size_t n = pad_to_blocks(opt.n, l);
        Fig3Series s;
        s.label = "low-l" + std::to_string(l);
        std::vector<std::vector<double>> curves(opt.runs);
        std::vector<double> ks(opt.runs, 0);
        std::atomic<std::size_t> bad{0};
        const uint64_t stream = hash_label("fig3/low") ^ l;
        parallel_runs(opt.runs, opt.threads, [&](std::size_t r) {
            Rng rng(derive_seed(opt.seed, stream, r));
            const auto fold = lsa_malicious_greedy(
                [&] { return provision_sifted_key(n / l, l, opt.p, rng, nullptr, nullptr); }, l,
                {}, rng);
            if (!fold.trace.converged) ++bad;
            curves[r] = curve_of(fold.trace);
            ks[r] = static_cast<double>(fold.trace.final_k());
        });
        s.mean_known.assign(opt.kmax, 0);
        for (const auto& c : curves)
            for (std::size_t k = 0; k < opt.kmax; ++k) s.mean_known[k] += c[k];
        for (auto& v : s.mean_known) v /= static_cast<double>(opt.runs);
        s.convergence_k = RunStats::of(std::move(ks), bad);
        series.push_back(std::move(s));
    }

    {
        Fig3Series s;
        s.label = "full-random";
        std::vector<std::vector<double>> curves(opt.runs);
        std::vector<double> ks(opt.runs, 0);
        std::size_t converged_runs = 0;
        const uint64_t stream = hash_label("fig3/full");
        parallel_runs(opt.runs, opt.threads, [&](std::size_t r) {
            Rng rng(derive_seed(opt.seed, stream, r));
            FoldOptions fopt;
            fopt.max_steps = opt.kmax;
            const auto fold = shift_add_greedy_full(
                [&] { return gen_generic_raw_key(opt.n, opt.p, rng); }, fopt, rng);
            curves[r] = curve_of(fold.trace);
            ks[r] = static_cast<double>(fold.trace.final_k());
        });
        for (std::size_t r = 0; r < opt.runs; ++r)
            if (curves[r].back() <= 1.0) ++converged_runs;
        s.mean_known.assign(opt.kmax, 0);
        for (const auto& c : curves)
            for (std::size_t k = 0; k < opt.kmax; ++k) s.mean_known[k] += c[k];
        for (auto& v : s.mean_known) v /= static_cast<double>(opt.runs);
        s.convergence_k = RunStats::of(std::move(ks), opt.runs - converged_runs);
        series.push_back(std::move(s));
    }
    return series;
}

AttackSummary run_attack(const AttackOptions& opt) {
    AttackSummary sum;
    const std::size_t policies = opt.with_random_baseline ? 2 : 1;
    sum.records.resize(opt.runs * policies);
    const uint64_t stream = hash_label("attack") ^ opt.n;
    parallel_runs(opt.runs * policies, opt.threads, [&](std::size_t idx) {
        const std::size_t r = idx / policies;
        const AddressPolicy policy =
            idx % policies == 0 ? AddressPolicy::optimal : AddressPolicy::random;
        // Paired seeds: both policies replay the same per-run stream.
        const uint64_t seed = derive_seed(opt.seed, stream, r);
        Rng rng(seed);
        AttackRunRecord rec;
        rec.run = r;
        rec.policy = policy;
        rec.seed = seed;
        rec.result = run_recovery(opt.n, SourceParams::wcs(opt.mu, Reporting::malicious_multiphoton),
                                  policy, rng, opt.cutoff_factor);
        if (!opt.keep_growth) rec.result.growth.clear();
        sum.records[idx] = std::move(rec);
    });
    std::vector<double> qopt, qrand;
    bool all_exact = true;
    for (const auto& rec : sum.records) {
        if (rec.policy == AddressPolicy::optimal) {
            qopt.push_back(static_cast<double>(rec.result.queries));
            all_exact = all_exact && rec.result.completed && rec.result.exact;
        } else {
            qrand.push_back(static_cast<double>(rec.result.queries));
        }
    }
    sum.optimal_queries = RunStats::of(std::move(qopt));
    sum.random_queries = RunStats::of(std::move(qrand));
    sum.all_exact = all_exact;
    return sum;
}

// ---------------------------------------------------------------------------
// Output helpers

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_table1_csv(std::ostream& os, const std::vector<Table1Cell>& cells) {
    os << "n,user,runs,max,min,mean,std,nonconverged\n";
    for (const auto& c : cells) {
        os << c.n << ",honest," << c.honest.values.size() << ',' << c.honest.maximum << ','
           << c.honest.minimum << ',' << fmt(c.honest.mean) << ',' << fmt(c.honest.stddev) << ','
           << c.honest.nonconverged << '\n';
        os << c.n << ",malicious," << c.malicious.values.size() << ',' << c.malicious.maximum
           << ',' << c.malicious.minimum << ',' << fmt(c.malicious.mean) << ','
           << fmt(c.malicious.stddev) << ',' << c.malicious.nonconverged << '\n';
    }
}

void write_table2_csv(std::ostream& os, const std::vector<Table2Cell>& cells) {
    os << "l,na,runs,max,min,mean,std,p_discard_analytic,p_discard_empirical,nonconverged\n";
    for (const auto& c : cells)
        for (const auto& [na, st] : c.k_for_na)
            os << c.l << ',' << na << ',' << st.values.size() << ',' << st.maximum << ','
               << st.minimum << ',' << fmt(st.mean) << ',' << fmt(st.stddev) << ','
               << fmt(c.p_discard_analytic) << ',' << fmt(c.p_discard_empirical) << ','
               << st.nonconverged << '\n';
}

void write_fig2_csv(std::ostream& os, const Fig2Result& r) {
    // One row per addition step: k, then one class per index
    // (0 unknown, 1 known, 2 parity-correlated).
    os << "k";
    for (std::size_t i = 0; i < r.padded_n; ++i) os << ",c" << i;
    os << '\n';
    for (std::size_t s = 0; s < r.trace.snapshots.size(); ++s) {
        os << r.trace.steps[s].k;
        for (uint8_t v : r.trace.snapshots[s]) os << ',' << static_cast<int>(v);
        os << '\n';
    }
}

void write_fig3_csv(std::ostream& os, const std::vector<Fig3Series>& series) {
    os << "series,k,mean_known\n";
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.mean_known.size(); ++k)
            os << s.label << ',' << (k + 1) << ',' << fmt(s.mean_known[k]) << '\n';
}

void write_attack_csv(std::ostream& os, const AttackSummary& s) {
    os << "run,policy,seed,queries,completed,exact\n";
    for (const auto& rec : s.records)
        os << rec.run << ',' << (rec.policy == AddressPolicy::optimal ? "optimal" : "random")
           << ',' << rec.seed << ',' << rec.result.queries << ',' << rec.result.completed << ','
           << rec.result.exact << '\n';
}

void write_attack_growth_csv(std::ostream& os, const AttackSummary& s) {
    os << "run,policy,query,known\n";
    for (const auto& rec : s.records)
        for (std::size_t q = 0; q < rec.result.growth.size(); ++q)
            os << rec.run << ','
               << (rec.policy == AddressPolicy::optimal ? "optimal" : "random") << ',' << (q + 1)
               << ',' << rec.result.growth[q] << '\n';
}

namespace {

nlohmann::json stats_json(const RunStats& st) {
    return {{"mean", st.mean},   {"std", st.stddev},        {"min", st.minimum},
            {"max", st.maximum}, {"runs", st.values.size()}, {"nonconverged", st.nonconverged},
            {"values", st.values}};
}

}  // namespace

nlohmann::json table1_json(const std::vector<Table1Cell>& cells) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : cells)
        j.push_back({{"n", c.n}, {"honest", stats_json(c.honest)},
                     {"malicious", stats_json(c.malicious)}});
    return j;
}

nlohmann::json table2_json(const std::vector<Table2Cell>& cells) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : cells) {
        nlohmann::json cell{{"l", c.l},
                            {"p_discard_analytic", c.p_discard_analytic},
                            {"p_discard_empirical", c.p_discard_empirical}};
        for (const auto& [na, st] : c.k_for_na) cell["na" + std::to_string(na)] = stats_json(st);
        j.push_back(std::move(cell));
    }
    return j;
}

nlohmann::json fig3_json(const std::vector<Fig3Series>& series) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : series)
        j.push_back({{"series", s.label},
                     {"mean_known", s.mean_known},
                     {"convergence_k", stats_json(s.convergence_k)}});
    return j;
}

nlohmann::json attack_json(const AttackSummary& s) {
    nlohmann::json j;
    j["optimal"] = stats_json(s.optimal_queries);
    if (!s.random_queries.values.empty()) j["random"] = stats_json(s.random_queries);
    j["all_exact"] = s.all_exact;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& rec : s.records)
        recs.push_back({{"run", rec.run},
                        {"policy", rec.policy == AddressPolicy::optimal ? "optimal" : "random"},
                        {"seed", rec.seed},
                        {"queries", rec.result.queries},
                        {"completed", rec.result.completed},
                        {"exact", rec.result.exact}});
    j["runs"] = std::move(recs);
    return j;
}

}  // namespace qokt::experiments
