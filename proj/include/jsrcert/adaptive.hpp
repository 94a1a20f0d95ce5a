#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jsrcert/certify.hpp"
#include "jsrcert/sampling.hpp"
#include "jsrcert/system.hpp"

namespace jsrcert {

struct SgdConfig {
    int iterations = 0;                          // T
    int batch_size = 200;                        // samples per gradient estimate
    std::function<double(int)> step_size;        // eta_k; default 0.3/(k+1)
    double basis_bound = 100.0;                  // upper eigenvalue of the search box
    int final_samples = 0;                       // certification batch; 0 means batch_size
    bool auto_fix_identity = true;               // collapse to P = I when the learned
                                                 // conditioning estimate is <= log(1.1)
};

struct HeuristicConfig {
    int initial_samples = 0;       // N0
    std::int64_t total_budget = 0; // N, hard cap on samples spent
    int max_iterations = 0;        // T
    double eta = 0.3;
    double eps = 1e-4;             // window sum of successive-iterate distances
    int window = 10;               // K
};

struct GradientResult {
    Matrix grad;
    double lambda_min = 0.0;
    bool multiplicity_flag = false;  // smallest eigenvalue numerically repeated:
                                     // the returned matrix is one subgradient
};

/// log kappa(B' P B): the conditioning of the learned shape after pulling the
/// sampling basis B through it.
double objective(const Matrix& b, const SymMatrix& p);

/// Closed-form gradient of the objective in B: B^-T - n P B v v' / lambda_min,
/// with v the unit eigenvector of the smallest eigenvalue of B' P B.
GradientResult grad_log_kappa(const Matrix& b, const SymMatrix& p);

struct TraceRow {
    int k = 0;
    std::int64_t samples_spent = 0;
    double log_kappa = 0.0;
    double grad_norm = 0.0;
    double basis_delta = 0.0;  // Frobenius distance between successive iterates
};

struct Trace {
    std::vector<TraceRow> rows;
    void save_csv(const std::string& path) const;
};

struct RunResult {
    SymMatrix basis;  // B_T
    Certificate certificate;
    Trace trace;
    std::vector<SymMatrix> iterates;  // B_0..B_T
    bool converged = false;           // heuristic only: window criterion fired
};

/// Decision-dependent stochastic gradient descent on the sampling basis:
/// each iteration samples a fresh batch under B_k, learns P_k from it, steps
/// against the conditioning gradient and projects back into the box. A final
/// fresh batch under B_T, paired in the original coordinates, feeds the
/// certificate.
RunResult run_sgd(Oracle& oracle, Rng& rng, const SgdConfig& cfg, const ConeConfig& cone,
                  double beta, double alpha, const SolveOptions& opt = {});

using SolveFn = std::function<SpdSolution(const Dataset&)>;

/// Sample-reusing variant: keeps every sample seen so far (mixed bases, never
/// certified directly), moves B toward the whitener P_k^(-1/2) with constant
/// rate, draws one extra sample per iteration, and spends the remaining
/// budget on a fresh certification set under the final basis.
/// solve_override substitutes the inner solver (used to exercise the exact
/// fixed-point behaviour in tests).
RunResult run_heuristic(Oracle& oracle, Rng& rng, const HeuristicConfig& cfg, const ConeConfig& cone,
                        double beta, double alpha, const SolveOptions& opt = {},
                        SolveFn solve_override = {});

/// Prior art baseline: one exploratory batch under the identity, whiten its
/// P, one certification batch under the guessed basis.
RunResult run_two_step(Oracle& oracle, Rng& rng, int initial_samples, std::int64_t total_samples,
                       const ConeConfig& cone, double beta, double alpha, double basis_bound,
                       const SolveOptions& opt = {});

/// Fixed Gaussian sampling, single certification.
RunResult run_fixed(Oracle& oracle, Rng& rng, std::int64_t n_samples, const ConeConfig& cone,
                    double beta, double alpha, const SolveOptions& opt = {}, bool fix_identity = false);

}  // namespace jsrcert
