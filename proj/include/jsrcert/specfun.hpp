#pragma once

#include <cstdint>

namespace jsrcert {

struct BetaParams {
    double a;
    double b;
};

/// Regularized incomplete beta function I(x; a, b), continued-fraction
/// evaluation with the symmetry switch at x = (a+1)/(a+b+2).
double inc_beta(double x, const BetaParams& p);

/// Unique x in [0,1] with inc_beta(x) = y, by bisection. Endpoints map exactly.
double inv_inc_beta(double y, const BetaParams& p);

/// Binomial lower tail sum_{i=0}^{zeta} C(N,i) eps^i (1-eps)^(N-i),
/// accumulated from log-gamma terms so large N cannot overflow.
double binom_tail(double eps, std::int64_t zeta, std::int64_t n_samples);

/// Unique eps in [0,1] with binom_tail(eps) = beta, by bisection
/// (requires zeta < N so the tail actually reaches 0 at eps = 1).
double inv_binom_tail(double beta, std::int64_t zeta, std::int64_t n_samples);

}  // namespace jsrcert
