#include "jsrcert/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace jsrcert {

namespace {

void check_params(const BetaParams& p) {
    if (!(p.a > 0.0) || !(p.b > 0.0)) throw std::domain_error("beta params must be positive");
}

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    const double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw std::runtime_error("inc_beta: continued fraction did not converge");
}

double log_choose(std::int64_t n, std::int64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Bisection to f(x) = target on [lo, hi] for nondecreasing f; runs to the
// fixpoint of interval halving so the result is pinned by the forward map.
template <class F>
double bisect_monotone(F f, double target, double lo, double hi, bool increasing) {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = f(mid);
        const bool go_right = increasing ? (v < target) : (v > target);
        if (go_right)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double inc_beta(double x, const BetaParams& p) {
    check_params(p);
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("inc_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double a = p.a, b = p.b;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_cf(x, a, b) / a;
    return 1.0 - std::exp(log_front) * beta_cf(1.0 - x, b, a) / b;
}

double inv_inc_beta(double y, const BetaParams& p) {
    check_params(p);
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("inv_inc_beta: y outside [0,1]");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 1.0;
    return bisect_monotone([&](double x) { return inc_beta(x, p); }, y, 0.0, 1.0, /*increasing=*/true);
}

double binom_tail(double eps, std::int64_t zeta, std::int64_t n_samples) {
    if (n_samples < 1 || zeta < 0 || zeta > n_samples) throw std::domain_error("binom_tail: need 0 <= zeta <= N, N >= 1");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("binom_tail: eps outside [0,1]");
    if (eps == 0.0) return 1.0;
    if (eps == 1.0) return zeta >= n_samples ? 1.0 : 0.0;
    const double le = std::log(eps);
    const double l1e = std::log1p(-eps);
    double s = 0.0;
    for (std::int64_t i = 0; i <= zeta; ++i) {
        s += std::exp(log_choose(n_samples, i) + i * le + (n_samples - i) * l1e);
    }
    return s < 1.0 ? s : 1.0;
}

double inv_binom_tail(double beta, std::int64_t zeta, std::int64_t n_samples) {
    if (n_samples < 1 || zeta < 0) throw std::domain_error("inv_binom_tail: bad zeta/N");
    if (zeta >= n_samples) throw std::domain_error("inv_binom_tail: zeta must be < N");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("inv_binom_tail: beta outside (0,1]");
    if (beta == 1.0) return 0.0;
    return bisect_monotone([&](double e) { return binom_tail(e, zeta, n_samples); }, beta, 0.0, 1.0,
                           /*increasing=*/false);
}

}  // namespace jsrcert
