#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qokt/attack.hpp"
#include "qokt/protocol.hpp"

namespace qokt::experiments {

// Aggregate over Monte Carlo runs. The standard deviation is the population
// one (divisor n).
struct RunStats {
    double mean = 0, stddev = 0, minimum = 0, maximum = 0;
    std::vector<double> values;
    std::size_t nonconverged = 0;

    static RunStats of(std::vector<double> values, std::size_t nonconverged = 0);
};

// Runs fn(run_index) for every index on a small worker pool. Results must be
// written to per-run slots; aggregation stays with the caller.
void parallel_runs(std::size_t runs, std::size_t threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Campaigns

struct Table1Options {
    std::vector<std::size_t> ns{900, 2500, 10000};
    std::size_t l = 8;
    double mu = 0.1;
    std::size_t runs = 100;
    uint64_t seed = 1;
    std::size_t threads = 0;  // 0: hardware default
};
struct Table1Cell {
    std::size_t n = 0;
    RunStats honest;
    RunStats malicious;
};
std::vector<Table1Cell> run_table1(const Table1Options& opt);

struct Table2Options {
    std::vector<std::size_t> ls{8, 10, 16};
    std::size_t n = 10000;
    double p = 0.25;
    std::vector<std::size_t> na{1, 2, 3};
    std::size_t runs = 100;
    uint64_t seed = 1;
    std::size_t threads = 0;
};
struct Table2Cell {
    std::size_t l = 0;
    double p_discard_analytic = 0;
    double p_discard_empirical = 0;
    std::map<std::size_t, RunStats> k_for_na;
};
std::vector<Table2Cell> run_table2(const Table2Options& opt);

struct Fig2Options {
    std::size_t n = 2500;
    std::size_t l = 8;
    double mu = 0.1;
    uint64_t seed = 1;
};
struct Fig2Result {
    std::size_t padded_n = 0;
    LsaTrace trace;  // snapshots filled: per step, index classes 0/1/2
};
Fig2Result run_fig2(const Fig2Options& opt);

struct Fig3Options {
    std::size_t n = 10000;
    double p = 0.25;
    std::vector<std::size_t> ls{8, 10, 16};
    std::size_t kmax = 24;
    std::size_t runs = 25;
    uint64_t seed = 1;
    std::size_t threads = 0;
};
struct Fig3Series {
    std::string label;
    std::vector<double> mean_known;  // index k-1
    RunStats convergence_k;          // k when one known bit is reached (low series)
};
std::vector<Fig3Series> run_fig3(const Fig3Options& opt);

struct AttackOptions {
    std::size_t n = 900;
    double mu = 0.1;
    std::size_t runs = 25;
    bool with_random_baseline = true;  // paired runs with random placement
    uint64_t seed = 1;
    std::size_t threads = 0;
    std::size_t cutoff_factor = 10;
    bool keep_growth = false;
};
struct AttackRunRecord {
    std::size_t run = 0;
    AddressPolicy policy = AddressPolicy::optimal;
    uint64_t seed = 0;
    AttackResult result;
};
struct AttackSummary {
    std::vector<AttackRunRecord> records;
    RunStats optimal_queries;
    RunStats random_queries;
    bool all_exact = false;  // over the optimal-policy runs
};
AttackSummary run_attack(const AttackOptions& opt);

// ---------------------------------------------------------------------------
// Output

void write_table1_csv(std::ostream& os, const std::vector<Table1Cell>& cells);
void write_table2_csv(std::ostream& os, const std::vector<Table2Cell>& cells);
void write_fig2_csv(std::ostream& os, const Fig2Result& r);
void write_fig3_csv(std::ostream& os, const std::vector<Fig3Series>& series);
void write_attack_csv(std::ostream& os, const AttackSummary& s);
void write_attack_growth_csv(std::ostream& os, const AttackSummary& s);

nlohmann::json table1_json(const std::vector<Table1Cell>& cells);
nlohmann::json table2_json(const std::vector<Table2Cell>& cells);
nlohmann::json fig3_json(const std::vector<Fig3Series>& series);
nlohmann::json attack_json(const AttackSummary& s);

// ---------------------------------------------------------------------------
// Verification against the pinned expectations file

nlohmann::json load_expectations(const std::string& path);
std::string default_expectations_path();

struct VerifyOptions {
    uint64_t seed = 424242;
    std::size_t runs = 100;     // table campaigns
    bool full_scale = false;    // opt-in long cells
    std::size_t threads = 0;
    nlohmann::json expectations;  // empty: load from the default path
};

struct CriterionResult {
    int criterion = 0;
    std::string name;
    double observed = 0;
    double expected = 0;
    double tolerance = 0;
    std::string comparator;  // "abs", "le", "ge", "eq"
    bool pass = false;
};

struct VerifyReport {
    std::vector<CriterionResult> results;
    bool all_pass() const;
};

VerifyReport run_verification(const VerifyOptions& opt);
void write_verify_csv(std::ostream& os, const VerifyReport& report);

}  // namespace qokt::experiments
