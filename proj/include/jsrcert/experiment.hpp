#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jsrcert/adaptive.hpp"
#include "jsrcert/certify.hpp"
#include "jsrcert/system.hpp"

namespace jsrcert {

struct MethodParams {
    int sgd_batch = 200;
    double sgd_eta0 = 0.3;       // eta_k = sgd_eta0 / (k+1)
    int sgd_final = 0;           // 0: remainder of the budget after the gradient batches
    double heur_eta = 0.3;
    double heur_eps = 1e-4;
    int heur_window = 10;
    int heur_initial = 0;        // 0: min(200, max(d, N/4))
    int two_step_initial = 0;    // 0: min(N/2, 500)
};

struct ExperimentSpec {
    SwitchedSystem system;
    std::vector<std::string> methods;  // fixed | sgd | two-step | heuristic
    std::vector<std::int64_t> grid;    // ascending sample budgets
    int repeats = 1;
    double beta = 0.05;
    double alpha = 0.0;  // 0: uniform 1/m from the oracle
    double cone_hi = 100.0;
    double basis_bound = 100.0;
    std::uint64_t seed = 0;
    MethodParams params;
    SolveOptions solve;

    void validate() const;
};

struct ResultRow {
    std::string method;
    std::int64_t n_total = 0;
    std::uint64_t seed = 0;
    double gamma_star = 0.0;
    double kappa_value = 0.0;
    double inflation = 0.0;
    std::optional<double> bound;
    std::int64_t samples_spent = 0;
    double wall_seconds = 0.0;
    std::string error;  // nonempty when the cell failed; bound stays empty
};

struct SummaryRow {
    std::string method;
    std::int64_t n_total = 0;
    int repeats = 0;
    int certified = 0;                 // rows with a finite bound
    std::optional<double> bound_mean;  // present only when every repeat certified
    std::optional<double> bound_std;
    double gamma_mean = 0.0;
    double kappa_mean = 0.0;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<SummaryRow> summary;
};

struct CellResult {
    ResultRow row;
    std::optional<Certificate> certificate;
    Trace trace;
};

/// One (method, budget, seed) cell. The cell seed is derived from the master
/// seed and (N, repeat) only, so methods see paired randomness.
CellResult run_cell(const SwitchedSystem& sys, const std::string& method, std::int64_t n_total,
                    std::uint64_t cell_seed, const ExperimentSpec& spec);

SweepResult run_sweep(const ExperimentSpec& spec);

void save_rows_csv(const std::vector<ResultRow>& rows, const std::string& path);
void save_summary_json(const SweepResult& result, const std::string& path);

struct ValidationReport {
    int trials = 0;
    int violations = 0;     // true contraction rate of P_star exceeded the bound
    int uncertified = 0;    // rows with no bound: no claim, no violation
    int failed = 0;
    double violation_fraction = 0.0;
    double threshold = 0.0;  // beta + 3 sqrt(beta(1-beta)/trials)
    double ci_low = 0.0;     // 99% binomial interval (normal approximation)
    double ci_high = 0.0;
    bool pass = false;
    bool verdict_valid = false;  // false when trials give no statistical power

    std::string to_json() const;
};

/// Empirical check of the confidence bound: repeat the certification and
/// count how often the model-aware contraction rate of the learned P_star
/// lands above the claimed bound.
ValidationReport run_validation(const SwitchedSystem& sys, const std::string& method,
                                std::int64_t n_samples, double beta, int trials,
                                std::uint64_t seed, const ExperimentSpec& base);

}  // namespace jsrcert
