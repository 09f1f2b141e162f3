// Command-line driver for the QOKT private-query simulations: table and
// figure campaigns, single protocol sessions, the multi-query recovery
// attack, and the pinned-expectations verification run.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qokt/experiments.hpp"

namespace {

using namespace qokt;
using namespace qokt::experiments;

std::unique_ptr<std::ostream> open_out(const std::string& path, std::ostream*& os) {
    if (path.empty() || path == "-") {
        os = &std::cout;
        return nullptr;
    }
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw std::runtime_error("cannot open output file: " + path);
    os = f.get();
    return f;
}

// Fills option defaults from a JSON config file; explicitly passed flags win.
nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

template <typename T>
void from_config(const nlohmann::json& cfg, const CLI::Option* opt, const char* key, T& value) {
    if (opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

struct CommonArgs {
    uint64_t seed = 1;
    std::size_t runs = 0;  // 0: subcommand default
    std::size_t threads = 0;
    std::string out = "-";
    std::string format = "csv";
    std::string config;
    bool full_scale = false;

    CLI::Option *seed_opt, *runs_opt, *threads_opt, *out_opt, *format_opt, *full_opt;

    void attach(CLI::App* app) {
        seed_opt = app->add_option("--seed", seed, "master seed");
        runs_opt = app->add_option("--runs", runs, "Monte Carlo runs");
        threads_opt = app->add_option("--threads", threads, "worker threads (0 = hardware)");
        out_opt = app->add_option("--out", out, "output path ('-' for stdout)");
        format_opt = app->add_option("--format", format, "csv or json")
                         ->check(CLI::IsMember({"csv", "json"}));
        app->add_option("--config", config, "JSON config file with option defaults");
        full_opt = app->add_flag("--full-scale", full_scale, "include the long opt-in cells");
    }

    void merge(const nlohmann::json& cfg) {
        from_config(cfg, seed_opt, "seed", seed);
        from_config(cfg, runs_opt, "runs", runs);
        from_config(cfg, threads_opt, "threads", threads);
        from_config(cfg, out_opt, "out", out);
        from_config(cfg, format_opt, "format", format);
        if (full_opt->count() == 0 && cfg.contains("full_scale"))
            full_scale = cfg.at("full_scale").get<bool>();
    }
};

void emit(const std::string& out_path, const std::string& format, const nlohmann::json& as_json,
          const std::function<void(std::ostream&)>& as_csv) {
    std::ostream* os = nullptr;
    auto holder = open_out(out_path, os);
    if (format == "json")
        *os << as_json.dump(2) << '\n';
    else
        as_csv(*os);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QOKT-based private query simulations"};
    app.require_subcommand(1);

    // table1
    auto* t1 = app.add_subcommand("table1",
                                  "convergence statistics of the fold count k for honest and "
                                  "malicious users of the improved protocol");
    CommonArgs t1c;
    t1c.attach(t1);
    std::vector<std::size_t> t1_ns{900, 2500, 10000};
    std::size_t t1_l = 8;
    double t1_mu = 0.1;
    auto* t1_ns_opt = t1->add_option("--n", t1_ns, "database sizes");
    auto* t1_l_opt = t1->add_option("--l", t1_l, "block length");
    auto* t1_mu_opt = t1->add_option("--mu", t1_mu, "mean photon number");

    // table2
    auto* t2 = app.add_subcommand("table2",
                                  "generic-model fold counts for block lengths and targets n_A");
    CommonArgs t2c;
    t2c.attach(t2);
    std::vector<std::size_t> t2_ls{8, 10, 16};
    std::vector<std::size_t> t2_na{1, 2, 3};
    std::size_t t2_n = 10000;
    double t2_p = 0.25;
    auto* t2_ls_opt = t2->add_option("--l", t2_ls, "block lengths");
    auto* t2_n_opt = t2->add_option("--n", t2_n, "database size");
    auto* t2_p_opt = t2->add_option("--p", t2_p, "per-bit known probability");
    auto* t2_na_opt = t2->add_option("--na", t2_na, "target known-bit counts");

    // fig2
    auto* f2 = app.add_subcommand("fig2",
                                  "per-index knowledge classes after each addition of one "
                                  "malicious greedy run");
    CommonArgs f2c;
    f2c.attach(f2);
    std::size_t f2_n = 2500, f2_l = 8;
    double f2_mu = 0.1;
    auto* f2_n_opt = f2->add_option("--n", f2_n, "database size");
    auto* f2_l_opt = f2->add_option("--l", f2_l, "block length");
    auto* f2_mu_opt = f2->add_option("--mu", f2_mu, "mean photon number");

    // fig3
    auto* f3 = app.add_subcommand("fig3",
                                  "mean known-bit curves: low-shift folding vs full-range "
                                  "shift selection");
    CommonArgs f3c;
    f3c.attach(f3);
    std::vector<std::size_t> f3_ls{8, 10, 16};
    std::size_t f3_n = 10000, f3_kmax = 24;
    double f3_p = 0.25;
    auto* f3_ls_opt = f3->add_option("--l", f3_ls, "low-shift block lengths");
    auto* f3_n_opt = f3->add_option("--n", f3_n, "database size");
    auto* f3_p_opt = f3->add_option("--p", f3_p, "per-bit known probability");
    auto* f3_k_opt = f3->add_option("--kmax", f3_kmax, "curve length");

    // attack
    auto* at = app.add_subcommand("attack",
                                  "multi-query database recovery against the original protocol "
                                  "under a weak-coherent source");
    CommonArgs atc;
    atc.attach(at);
    std::size_t at_n = 900;
    double at_mu = 0.1;
    bool at_no_baseline = false;
    std::string at_growth_out;
    auto* at_n_opt = at->add_option("--n", at_n, "database size");
    auto* at_mu_opt = at->add_option("--mu", at_mu, "mean photon number");
    at->add_flag("--no-baseline", at_no_baseline, "skip the paired random-placement baseline");
    at->add_option("--growth-out", at_growth_out, "also write knowledge-growth curves (CSV)");

    // session
    auto* se = app.add_subcommand("session", "run one protocol session, print the transcript");
    CommonArgs sec;
    sec.attach(se);
    std::string se_variant = "improved", se_source = "ideal", se_reporting = "honest";
    SessionConfig se_cfg;
    auto* se_var_opt = se->add_option("--variant", se_variant, "original | improved | generic")
                           ->check(CLI::IsMember({"original", "improved", "generic"}));
    auto* se_n_opt = se->add_option("--n", se_cfg.n, "database size");
    auto* se_l_opt = se->add_option("--l", se_cfg.l, "block length");
    auto* se_k_opt = se->add_option("--k", se_cfg.k, "substring count");
    auto* se_i_opt = se->add_option("--i", se_cfg.address, "retrieval address (1-based)");
    auto* se_p_opt = se->add_option("--p", se_cfg.p, "generic known probability");
    double se_mu = 0.1;
    auto* se_mu_opt = se->add_option("--mu", se_mu, "mean photon number");
    auto* se_src_opt = se->add_option("--source", se_source, "ideal | wcs")
                           ->check(CLI::IsMember({"ideal", "wcs"}));
    auto* se_rep_opt = se->add_option("--reporting", se_reporting, "honest | malicious")
                           ->check(CLI::IsMember({"honest", "malicious"}));

    // verify
    auto* ve = app.add_subcommand("verify",
                                  "run the pinned-expectations checks; nonzero exit on failure");
    CommonArgs vec;
    vec.attach(ve);
    std::string ve_expect;
    ve->add_option("--expectations", ve_expect, "expectations JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t1->parsed()) {
            const auto cfg = load_config(t1c.config);
            t1c.merge(cfg);
            from_config(cfg, t1_ns_opt, "n", t1_ns);
            from_config(cfg, t1_l_opt, "l", t1_l);
            from_config(cfg, t1_mu_opt, "mu", t1_mu);
            Table1Options opt;
            opt.ns = t1_ns;
            if (t1c.full_scale) opt.ns.push_back(90000);
            opt.l = t1_l;
            opt.mu = t1_mu;
            opt.runs = t1c.runs ? t1c.runs : 100;
            opt.seed = t1c.seed;
            opt.threads = t1c.threads;
            const auto cells = run_table1(opt);
            emit(t1c.out, t1c.format, table1_json(cells),
                 [&](std::ostream& os) { write_table1_csv(os, cells); });
        } else if (t2->parsed()) {
            const auto cfg = load_config(t2c.config);
            t2c.merge(cfg);
            from_config(cfg, t2_ls_opt, "l", t2_ls);
            from_config(cfg, t2_n_opt, "n", t2_n);
            from_config(cfg, t2_p_opt, "p", t2_p);
            from_config(cfg, t2_na_opt, "na", t2_na);
            Table2Options opt;
            opt.ls = t2_ls;
            opt.n = t2_n;
            opt.p = t2_p;
            opt.na = t2_na;
            opt.runs = t2c.runs ? t2c.runs : 100;
            opt.seed = t2c.seed;
            opt.threads = t2c.threads;
            const auto cells = run_table2(opt);
            emit(t2c.out, t2c.format, table2_json(cells),
                 [&](std::ostream& os) { write_table2_csv(os, cells); });
        } else if (f2->parsed()) {
            const auto cfg = load_config(f2c.config);
            f2c.merge(cfg);
            from_config(cfg, f2_n_opt, "n", f2_n);
            from_config(cfg, f2_l_opt, "l", f2_l);
            from_config(cfg, f2_mu_opt, "mu", f2_mu);
            Fig2Options opt;
            opt.n = f2_n;
            opt.l = f2_l;
            opt.mu = f2_mu;
            opt.seed = f2c.seed;
            const auto res = run_fig2(opt);
            std::ostream* os = nullptr;
            auto holder = open_out(f2c.out, os);
            write_fig2_csv(*os, res);
        } else if (f3->parsed()) {
            const auto cfg = load_config(f3c.config);
            f3c.merge(cfg);
            from_config(cfg, f3_ls_opt, "l", f3_ls);
            from_config(cfg, f3_n_opt, "n", f3_n);
            from_config(cfg, f3_p_opt, "p", f3_p);
            from_config(cfg, f3_k_opt, "kmax", f3_kmax);
            Fig3Options opt;
            opt.ls = f3_ls;
            opt.n = f3_n;
            opt.p = f3_p;
            opt.kmax = f3_kmax;
            opt.runs = f3c.runs ? f3c.runs : 25;
            opt.seed = f3c.seed;
            opt.threads = f3c.threads;
            const auto series = run_fig3(opt);
            emit(f3c.out, f3c.format, fig3_json(series),
                 [&](std::ostream& os) { write_fig3_csv(os, series); });
        } else if (at->parsed()) {
            const auto cfg = load_config(atc.config);
            atc.merge(cfg);
            from_config(cfg, at_n_opt, "n", at_n);
            from_config(cfg, at_mu_opt, "mu", at_mu);
            AttackOptions opt;
            opt.n = atc.full_scale ? 10000 : at_n;
            opt.mu = at_mu;
            opt.runs = atc.runs ? atc.runs : 25;
            opt.with_random_baseline = !at_no_baseline && !atc.full_scale;
            opt.seed = atc.seed;
            opt.threads = atc.threads;
            opt.keep_growth = !at_growth_out.empty();
            const auto sum = run_attack(opt);
            emit(atc.out, atc.format, attack_json(sum),
                 [&](std::ostream& os) { write_attack_csv(os, sum); });
            if (!at_growth_out.empty()) {
                std::ofstream g(at_growth_out, std::ios::binary);
                write_attack_growth_csv(g, sum);
            }
            std::cerr << "mean queries (optimal): " << sum.optimal_queries.mean << '\n';
        } else if (se->parsed()) {
            const auto cfg = load_config(sec.config);
            sec.merge(cfg);
            from_config(cfg, se_var_opt, "variant", se_variant);
            from_config(cfg, se_n_opt, "n", se_cfg.n);
            from_config(cfg, se_l_opt, "l", se_cfg.l);
            from_config(cfg, se_k_opt, "k", se_cfg.k);
            from_config(cfg, se_i_opt, "i", se_cfg.address);
            from_config(cfg, se_p_opt, "p", se_cfg.p);
            from_config(cfg, se_mu_opt, "mu", se_mu);
            from_config(cfg, se_src_opt, "source", se_source);
            from_config(cfg, se_rep_opt, "reporting", se_reporting);
            se_cfg.variant = variant_from_string(se_variant);
            se_cfg.seed = sec.seed;
            const Reporting rep = se_reporting == "malicious" ? Reporting::malicious_multiphoton
                                                              : Reporting::honest;
            se_cfg.source =
                se_source == "wcs" ? SourceParams::wcs(se_mu, rep) : SourceParams::ideal();
            const auto tr = run_session(se_cfg);
            std::ostream* os = nullptr;
            auto holder = open_out(sec.out, os);
            *os << tr.to_json_line() << '\n';
        } else if (ve->parsed()) {
            const auto cfg = load_config(vec.config);
            vec.merge(cfg);
            VerifyOptions opt;
            opt.seed = vec.seed_opt->count() || cfg.contains("seed") ? vec.seed : 424242;
            opt.runs = vec.runs ? vec.runs : 100;
            opt.full_scale = vec.full_scale;
            opt.threads = vec.threads;
            if (!ve_expect.empty()) opt.expectations = load_expectations(ve_expect);
            const auto report = run_verification(opt);
            std::ostream* os = nullptr;
            auto holder = open_out(vec.out, os);
            write_verify_csv(*os, report);
            std::size_t passed = 0;
            for (const auto& r : report.results)
                if (r.pass) ++passed;
            std::cerr << passed << '/' << report.results.size() << " checks passed\n";
            return report.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
