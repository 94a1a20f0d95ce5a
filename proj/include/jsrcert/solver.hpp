#pragma once

#include <cstddef>
#include <functional>

#include "jsrcert/matcore.hpp"

namespace jsrcert {

/// Worst one-step growth over the constraint family at the current P:
/// a state pair (x, y) attaining the largest y'Py / x'Px. Datasets report
/// their argmax sample; the model-based path reports the extremal direction
/// of the worst mode.
struct WorstCase {
    double ratio_sq = 0.0;
    Vec x;
    Vec y;
    std::size_t index = 0;  // which constraint is active (sample or mode)
};

using WorstFn = std::function<WorstCase(const SymMatrix& p)>;

struct FeasOptions {
    int iters = 2000;
    double feas_tol = 1e-8;  // relative acceptance threshold on the squared ratio
};

struct FeasResult {
    SymMatrix p;              // iterate with the smallest worst-case violation
    double max_violation = 0; // worst ratio_sq at p minus gamma^2
    bool feasible = false;
};

/// Seeks P in {I <= P <= cone_hi I} with every growth ratio at most gamma^2,
/// by the ellipsoid method with deep cuts over the d = n(n+1)/2 free entries
/// of P. Box violations and the worst sample ratio each supply one cut per
/// round. Deterministic; infeasibility is a return state, not an error.
FeasResult min_violation_search(const WorstFn& worst, int dim, double gamma, double cone_hi,
                                const FeasOptions& opt, const SymMatrix* warm_start = nullptr);

struct BisectResult {
    SymMatrix p;       // last feasible iterate (identity when nothing better certified)
    double gamma_hi = 0.0;
};

/// Bisection on gamma over [0, gamma_hi0]. gamma_hi0 must be feasible with
/// the starting shape (the identity by default; pass warm0 to refine from a
/// known incumbent).
BisectResult bisect_gamma(const WorstFn& worst, int dim, double gamma_hi0, double cone_hi,
                          int max_iters, double gamma_tol, const FeasOptions& opt,
                          const SymMatrix* warm0 = nullptr);

}  // namespace jsrcert
