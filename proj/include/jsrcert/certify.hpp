#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "jsrcert/kernels.hpp"
#include "jsrcert/matcore.hpp"
#include "jsrcert/sampling.hpp"
#include "jsrcert/solver.hpp"
#include "jsrcert/specfun.hpp"

namespace jsrcert {

/// Search set {I <= P <= cone_hi I}; d is the dimension of its span:
/// n(n+1)/2 for the full cone, 1 when P is pinned to the identity.
struct ConeConfig {
    double cone_hi = 100.0;
    int d = 0;

    static ConeConfig full(int dim, double cone_hi) {
        return {cone_hi, dim * (dim + 1) / 2};
    }
    static ConeConfig identity_only() { return {1.0, 1}; }
};

struct ConfidenceParams {
    double beta = 0.05;   // 1 - confidence on the sampling
    double alpha = 1.0;   // lower bound on every mode probability
    std::int64_t n_samples = 0;
};

struct SolveOptions {
    int bisect_iters = 40;
    double gamma_tol = 1e-4;
    FeasOptions feas;
    ExecPolicy policy = ExecPolicy::Auto;
};

/// Solver output: the candidate quadratic shape with its cached
/// eigenstructure, conditioning and data provenance.
struct SpdSolution {
    SymMatrix p;
    EigenPair eig;
    double kappa_value = 1.0;
    double gamma = 0.0;  // rho_hat of the producing dataset at p (recomputed)
    std::string dataset_tag;
};

struct Certificate {
    double gamma_star = 0.0;
    SymMatrix p_star;
    double kappa_value = 1.0;
    double inflation = 1.0;         // +infinity when no certificate is possible
    std::optional<double> bound;    // gamma_star * inflation when finite
    double beta = 0.0;
    double alpha = 1.0;
    std::int64_t n_samples = 0;
    int d = 0;
    int dim = 0;
    std::string basis_tag;
    std::int64_t samples_spent = 0;

    std::string to_json() const;
    static Certificate from_json(const std::string& text);
    void save(const std::string& path) const;
    static Certificate load(const std::string& path);
};

/// Empirical contraction rate max_i ||y_i||_P / ||x_i||_P.
double rho_hat(const Dataset& data, const SymMatrix& p, ExecPolicy policy = ExecPolicy::Auto);

/// Quasi-convex solve of the data-driven contraction problem: bisection on
/// gamma with the ellipsoid feasibility engine inside. The reported gamma is
/// re-evaluated on the returned P (never the bisection's internal estimate),
/// so the result is sound even if the inner solver stalls, and never exceeds
/// rho_hat(data, I). A warm start seeds the bisection's incumbent; useful
/// when re-solving after small data changes.
SpdSolution solve_gamma_star(const Dataset& data, const ConeConfig& cone, const SolveOptions& opt = {},
                             const SymMatrix* warm_start = nullptr);

/// One feasibility stage at a fixed gamma, exposed for diagnostics and tests.
FeasResult feasibility_search(const Dataset& data, double gamma, const ConeConfig& cone,
                              const FeasOptions& opt = {}, const SymMatrix* warm_start = nullptr,
                              ExecPolicy policy = ExecPolicy::Auto);

/// Multiplicative correction from empirical rate to probabilistic JSR bound:
/// 1/sqrt(1 - I^-1((k/alpha) Phi^-1(beta; d-1; N); (n-1)/2; 1/2)).
/// Returns +infinity when the inner argument leaves [0,1), i.e. the
/// conditioning is too poor for this sample size.
double inflation_factor(double beta, double k, std::int64_t n_samples, int d, double alpha, int dim);

/// Full certification pipeline on a single-basis dataset. With fix_identity
/// the search set collapses to {I} (d = 1, kappa = 1) and gamma_star is the
/// raw identity-norm rate.
Certificate certify(const Dataset& data, const ConeConfig& cone, const ConfidenceParams& conf,
                    bool fix_identity = false, const SolveOptions& opt = {});

}  // namespace jsrcert
