#include "jsrcert/solver.hpp"

#include <algorithm>
#include <cmath>

namespace jsrcert {

namespace {

// Isometric coordinates for symmetric matrices: diagonal entries as-is,
// off-diagonals scaled by sqrt(2), so Frobenius products become dot products.
constexpr double kSqrt2 = 1.4142135623730950488;

Vec vec_sym(const Matrix& m) {
    const int n = m.rows();
    Vec z;
    z.reserve(n * (n + 1) / 2);
    for (int i = 0; i < n; ++i) z.push_back(m(i, i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) z.push_back(kSqrt2 * m(i, j));
    return z;
}

Matrix mat_sym(const Vec& z, int n) {
    Matrix m(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i) m(i, i) = z[k++];
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            m(i, j) = m(j, i) = z[k++] / kSqrt2;
        }
    return m;
}

}  // namespace

FeasResult min_violation_search(const WorstFn& worst, int dim, double gamma, double cone_hi,
                                const FeasOptions& opt, const SymMatrix* warm_start) {
    const double gamma_sq = gamma * gamma;
    const double accept = opt.feas_tol * (1.0 + gamma_sq);
    const int d = dim * (dim + 1) / 2;

    // Seed the incumbent from the warm start (or the identity) so the
    // trivial stages resolve without touching the ellipsoid at all.
    SymMatrix p_best = warm_start ? *warm_start : SymMatrix::identity(dim);
    WorstCase wc = worst(p_best);
    double v_best = wc.ratio_sq - gamma_sq;
    if (v_best <= accept) return {p_best, v_best, true};
    if (d == 1) return {p_best, v_best, false};  // scalar P scales out of every ratio

    // Initial ball around the box center, large enough to contain the box.
    const double center = 0.5 * (1.0 + cone_hi);
    Vec z = vec_sym(center * Matrix::identity(dim));
    const double radius = cone_hi * dim;
    Matrix e = (radius * radius) * Matrix::identity(d);

    for (int t = 0; t < opt.iters; ++t) {
        const SymMatrix p = SymMatrix::symmetrized(mat_sym(z, dim));
        EigenPair ep = sym_eig(p);

        Vec cut;         // halfspace {cut . q <= b} contains the feasible set
        double b = 0.0;
        if (ep.values.front() < 1.0 - 1e-12) {
            Vec v(dim);
            for (int i = 0; i < dim; ++i) v[i] = ep.vectors(i, 0);
            cut = vec_sym(-1.0 * outer(v, v));
            b = -1.0;
        } else if (ep.values.back() > cone_hi * (1.0 + 1e-12)) {
            Vec v(dim);
            for (int i = 0; i < dim; ++i) v[i] = ep.vectors(i, dim - 1);
            cut = vec_sym(outer(v, v));
            b = cone_hi;
        } else {
            wc = worst(p);
            const double v = wc.ratio_sq - gamma_sq;
            if (v < v_best) {
                v_best = v;
                p_best = p;
                if (v <= accept) return {p_best, v_best, true};
            }
            cut = vec_sym(outer(wc.y, wc.y) - gamma_sq * outer(wc.x, wc.x));
            b = 0.0;
        }

        Vec ea(d, 0.0);
        double aea = 0.0;
        double az = 0.0;
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += e(i, j) * cut[j];
            ea[i] = s;
            aea += cut[i] * s;
            az += cut[i] * z[i];
        }
        if (!(aea > 0.0)) break;  // degenerate localization
        const double root = std::sqrt(aea);
        double alpha = (az - b) / root;
        if (alpha >= 1.0) break;  // the whole localization violates the cut: infeasible
        if (alpha < 0.0) alpha = 0.0;

        const double dd = static_cast<double>(d);
        const double tau = (1.0 + dd * alpha) / (dd + 1.0);
        const double delta = (dd * dd) * (1.0 - alpha * alpha) / (dd * dd - 1.0);
        const double sigma = 2.0 * (1.0 + dd * alpha) / ((dd + 1.0) * (1.0 + alpha));

        for (int i = 0; i < d; ++i) z[i] -= tau * ea[i] / root;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) e(i, j) = delta * (e(i, j) - sigma * ea[i] * ea[j] / aea);
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const double s = 0.5 * (e(i, j) + e(j, i));
                e(i, j) = e(j, i) = s;
            }
    }
    return {p_best, v_best, v_best <= accept};
}

BisectResult bisect_gamma(const WorstFn& worst, int dim, double gamma_hi0, double cone_hi,
                          int max_iters, double gamma_tol, const FeasOptions& opt,
                          const SymMatrix* warm0) {
    double lo = 0.0;
    double hi = gamma_hi0;
    SymMatrix p_inc = warm0 ? *warm0 : SymMatrix::identity(dim);
    SymMatrix warm = p_inc;
    for (int it = 0; it < max_iters && hi - lo > gamma_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        FeasResult r = min_violation_search(worst, dim, mid, cone_hi, opt, &warm);
        warm = r.p;
        if (r.feasible) {
            hi = mid;
            p_inc = r.p;
        } else {
            lo = mid;
        }
    }
    return {p_inc, hi};
}

}  // namespace jsrcert
