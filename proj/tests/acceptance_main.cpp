// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion carries its own runtime envelope, measured and enforced.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsrcert/adaptive.hpp"
#include "jsrcert/certify.hpp"
#include "jsrcert/experiment.hpp"
#include "jsrcert/sampling.hpp"
#include "jsrcert/specfun.hpp"
#include "jsrcert/system.hpp"

using namespace jsrcert;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

SymMatrix random_spd(int n, Rng& rng, double ridge) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    return SymMatrix::symmetrized(transpose(g) * g + ridge * Matrix::identity(n));
}

SwitchedSystem stable_system(int dim, int modes, double target, std::uint64_t& seed) {
    for (;; ++seed) {
        try {
            SwitchedSystem sys = gen_random_stable(dim, modes, target, seed);
            ++seed;
            return sys;
        } catch (const std::runtime_error&) {
            // screened draw, advance the seed
        }
    }
}

Dataset collect_identity(const SwitchedSystem& sys, int count, std::uint64_t seed) {
    OracleStream oracle(sys, {{}, split_seed(seed, 1)});
    Rng rng(split_seed(seed, 2));
    return collect(oracle, BasisTransform::identity(sys.dim), count, rng).original;
}

// ---- criterion 1: gradient vs central finite differences ----
Outcome criterion_gradient() {
    Rng rng(20250);
    double worst = 0.0;
    int tested = 0;
    const int dims[] = {2, 3, 5};
    while (tested < 60) {
        const int n = dims[tested % 3];
        SymMatrix p = random_spd(n, rng, 0.2);
        SymMatrix b = project_box(random_spd(n, rng, 1.0).mat(), 1.0, 3.0);
        GradientResult g = grad_log_kappa(b.mat(), p);
        if (g.multiplicity_flag) continue;  // needs a simple smallest eigenvalue
        ++tested;
        const double h = 1e-6;
        Matrix fd(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Matrix hi = b.mat(), lo = b.mat();
                hi(i, j) += h;
                lo(i, j) -= h;
                fd(i, j) = (objective(hi, p) - objective(lo, p)) / (2.0 * h);
            }
        worst = std::max(worst, frobenius_norm(g.grad - fd) / std::max(1.0, frobenius_norm(fd)));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max relative deviation %.3g over 60 pairs", worst);
    return {worst <= 1e-5, buf};
}

// ---- criterion 2: solver vs exhaustive grid ----
double grid_oracle_gamma(const Dataset& d, double cone_hi) {
    double best = std::numeric_limits<double>::infinity();
    for (int ai = 0; ai < 180; ++ai) {
        const double t = kPi * ai / 180.0;
        const double c = std::cos(t), s = std::sin(t);
        for (int si = 0; si < 60; ++si) {
            const double scale = std::exp(std::log(cone_hi) * si / 59.0);
            Matrix p(2, 2);
            p(0, 0) = scale * c * c + s * s;
            p(0, 1) = (scale - 1.0) * c * s;
            p(1, 0) = p(0, 1);
            p(1, 1) = scale * s * s + c * c;
            const SymMatrix ps = SymMatrix::symmetrized(p);
            double worst = 0.0;
            for (const OneStepSample& smp : d.samples)
                worst = std::max(worst, quad_form(ps, smp.y) / quad_form(ps, smp.x));
            best = std::min(best, std::sqrt(worst));
        }
    }
    return best;
}

Outcome criterion_solver_grid() {
    double worst_rel = 0.0;
    std::uint64_t sys_seed = 1;
    for (int i = 0; i < 20; ++i) {
        SwitchedSystem sys = stable_system(2, 2, 0.9, sys_seed);
        Dataset d = collect_identity(sys, 20, 1000 + i);
        SpdSolution sol = solve_gamma_star(d, ConeConfig::full(2, 100.0));
        const double oracle = grid_oracle_gamma(d, 100.0);
        worst_rel = std::max(worst_rel, std::abs(sol.gamma - oracle) / oracle);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |solver-grid|/grid %.4f over 20 datasets", worst_rel);
    return {worst_rel <= 0.02, buf};
}

// ---- criterion 3: special-function round trips and closed forms ----
Outcome criterion_specfun() {
    double worst = 0.0;
    for (const BetaParams p : {BetaParams{0.5, 0.5}, BetaParams{1.0, 0.5}, BetaParams{2.0, 0.5}})
        for (int i = 0; i < 100; ++i) {
            const double y = (i + 0.5) / 100.0;
            worst = std::max(worst, std::abs(inc_beta(inv_inc_beta(y, p), p) - y));
        }
    for (std::int64_t zeta : {0, 1, 5})
        for (std::int64_t n : {10, 100, 1000})
            for (double beta : {0.01, 0.05, 0.2, 0.5, 0.9}) {
                const double eps = inv_binom_tail(beta, zeta, n);
                worst = std::max(worst, std::abs(binom_tail(eps, zeta, n) - beta));
            }
    if (worst > 1e-9) return {false, "round-trip error " + std::to_string(worst)};

    double worst_closed = 0.0;
    const BetaParams arcsine{0.5, 0.5};
    for (double x : {0.01, 0.1, 0.25, 0.5, 0.62, 0.9, 0.99})
        worst_closed = std::max(
            worst_closed, std::abs(inc_beta(x, arcsine) - (2.0 / kPi) * std::asin(std::sqrt(x))));
    for (std::int64_t n : {10, 100, 1000, 100000})
        for (double beta : {0.01, 0.05, 0.5}) {
            const double closed = 1.0 - std::exp(std::log(beta) / static_cast<double>(n));
            worst_closed = std::max(worst_closed, std::abs(inv_binom_tail(beta, 0, n) - closed));
        }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "round-trip %.2g, closed-form %.2g", worst, worst_closed);
    return {worst_closed <= 1e-10, buf};
}

// ---- criterion 4: empirical confidence of the bound ----
Outcome criterion_confidence() {
    std::uint64_t seed = 1;
    SwitchedSystem sys = stable_system(2, 2, 0.9, seed);
    ExperimentSpec base;
    base.system = sys;
    base.methods = {"fixed"};
    base.grid = {100};
    ValidationReport rep = run_validation(sys, "fixed", 100, 0.2, 200, 424242, base);
    const double limit = 0.2 + 3.0 * std::sqrt(0.16 / 200.0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "violations %d/200 (fraction %.4f, limit %.4f, uncertified %d)",
                  rep.violations, rep.violation_fraction, limit, rep.uncertified);
    return {rep.failed == 0 && rep.violation_fraction <= limit, buf};
}

// ---- criterion 5: sandwich between the identity rate and kappa ----
Outcome criterion_sandwich() {
    std::uint64_t sys_seed = 1;
    int checked = 0;
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 2;
        SwitchedSystem sys = stable_system(n, 2 + i % 3, 0.9, sys_seed);
        Dataset d = collect_identity(sys, 30 + (i % 4) * 10, 5000 + i);
        SpdSolution sol = solve_gamma_star(d, ConeConfig::full(n, 100.0));
        const double identity_rate = rho_hat(d, SymMatrix::identity(n));
        if (!(sol.gamma <= identity_rate + 1e-12)) return {false, "left inequality failed"};
        if (!(identity_rate <= sol.gamma * sol.kappa_value + 1e-8))
            return {false, "right inequality failed"};
        ++checked;
    }
    return {checked == 50, "50 seeded datasets, both inequalities hold"};
}

// ---- criterion 6: inflation factor monotonicity ----
Outcome criterion_inflation_monotone() {
    const double beta = 0.05, alpha = 1.0 / 3.0;
    const int d = 6, n = 3;
    double prev = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double k = 1.0 + 99.0 * i / 199.0;
        const double f = inflation_factor(beta, k, 1000, d, alpha, n);
        if (!(f >= prev)) return {false, "not nondecreasing in k at k=" + std::to_string(k)};
        prev = f;
    }
    double prev_n = std::numeric_limits<double>::infinity();
    std::int64_t last = 0;
    for (int i = 0; i < 200; ++i) {
        const double t = static_cast<double>(i) / 199.0;
        std::int64_t big_n =
            static_cast<std::int64_t>(std::llround(std::exp(std::log(6.0) * (1.0 - t) + std::log(1e5) * t)));
        if (big_n <= last) continue;
        last = big_n;
        const double f = inflation_factor(beta, 2.0, big_n, d, alpha, n);
        if (!(f <= prev_n)) return {false, "not nonincreasing in N at N=" + std::to_string(big_n)};
        prev_n = f;
    }
    return {true, "nondecreasing over 200 k-points, nonincreasing over the N-grid"};
}

// ---- criterion 7: method ordering at desk scale ----
Outcome criterion_ordering() {
    ExperimentSpec spec;
    spec.system = gen_random_stable(3, 3, 0.9, 6);
    spec.methods = {"fixed", "sgd", "two-step", "heuristic"};
    spec.grid = {200, 400, 800, 1600, 3200};
    spec.repeats = 10;
    spec.beta = 0.05;
    spec.cone_hi = 100.0;
    spec.basis_bound = 100.0;
    spec.seed = 2025;
    SweepResult result = run_sweep(spec);

    auto mean_bound = [&](const std::string& method, std::int64_t n) {
        for (const SummaryRow& s : result.summary)
            if (s.method == method && s.n_total == n)
                return s.bound_mean ? *s.bound_mean : std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::infinity();
    };
    auto first_certified = [&](const std::string& method) {
        for (std::int64_t n : spec.grid)
            if (mean_bound(method, n) < 1.0) return n;
        return std::numeric_limits<std::int64_t>::max();
    };

    const std::int64_t top = spec.grid.back();
    const double mh = mean_bound("heuristic", top);
    const double ms = mean_bound("sgd", top);
    const double mf = mean_bound("fixed", top);
    const std::int64_t fh = first_certified("heuristic");
    const std::int64_t fs = first_certified("sgd");
    const std::int64_t ff = first_certified("fixed");

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "mean bound at N=%lld: heuristic %.4f <= sgd %.4f <= fixed %.4f; "
                  "first N < 1: heuristic %lld <= sgd %lld <= fixed %lld",
                  static_cast<long long>(top), mh, ms, mf, static_cast<long long>(fh),
                  static_cast<long long>(fs), static_cast<long long>(ff));
    const bool pass = mh <= ms && ms <= mf && fh <= fs && fs <= ff;
    return {pass, buf};
}

// ---- criterion 8: exact contraction of the frozen-shape iteration ----
Outcome criterion_heuristic_contraction() {
    SwitchedSystem sys{2, {0.5 * Matrix::identity(2)}};
    OracleStream oracle(sys, {{}, 9001});
    Rng rng(9002);
    SymMatrix p_fixed = SymMatrix::diag({9.0, 1.0});
    const SymMatrix target = inv_sqrt(p_fixed);

    HeuristicConfig cfg;
    cfg.initial_samples = 5;
    cfg.total_budget = 150;
    cfg.max_iterations = 100;
    cfg.eta = 0.3;
    cfg.eps = 1e-14;
    SolveFn frozen = [&](const Dataset&) {
        SpdSolution sol;
        sol.p = p_fixed;
        sol.eig = sym_eig(p_fixed);
        sol.kappa_value = kappa(p_fixed);
        sol.gamma = 0.5;
        return sol;
    };
    RunResult res =
        run_heuristic(oracle, rng, cfg, ConeConfig::full(2, 100.0), 0.05, 1.0, {}, frozen);

    const double d0 = frobenius_norm(res.iterates.front().mat() - target.mat());
    long long reached = -1;
    for (std::size_t k = 0; k < res.iterates.size(); ++k) {
        if (frobenius_norm(res.iterates[k].mat() - target.mat()) <= 1e-8) {
            reached = static_cast<long long>(k);
            break;
        }
    }
    const long long expected =
        static_cast<long long>(std::ceil(std::log(1e-8 / d0) / std::log(1.0 - cfg.eta)));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "reached 1e-8 at step %lld, predicted %lld", reached, expected);
    return {reached >= 0 && std::llabs(reached - expected) <= 1, buf};
}

// ---- criterion 9: the two pairings share the optimal conditioning ----
Outcome criterion_equivalence() {
    SolveOptions tight;
    tight.gamma_tol = 1e-6;
    tight.bisect_iters = 60;
    tight.feas.iters = 20000;

    double worst = 0.0;
    std::uint64_t sys_seed = 1;
    int used = 0;
    for (int i = 0; used < 10 && i < 40; ++i) {
        SwitchedSystem sys = stable_system(2, 2, 0.9, sys_seed);
        Rng brng(7000 + i);
        SymMatrix b = project_box(random_spd(2, brng, 1.0).mat(), 1.0, 2.5);
        OracleStream oracle(sys, {{}, 7100u + static_cast<std::uint64_t>(i)});
        Rng rng(7200 + i);
        CollectResult c = collect(oracle, BasisTransform(b), 25, rng);

        const ConeConfig cone = ConeConfig::full(2, 100.0);
        SpdSolution direct = solve_gamma_star(c.original, cone, tight);
        // the change of variables maps the search cone onto itself only while
        // its upper bound stays inactive; skip instances pinned at the cap
        if (direct.kappa_value > 7.0) continue;
        ++used;
        SpdSolution primed = solve_gamma_star(c.transformed, cone, tight);
        worst = std::max(worst, std::abs(std::log(direct.kappa_value) - objective(b.mat(), primed.p)));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |log kappa difference| %.5f over %d instances", worst, used);
    return {worst <= 1e-3 && used == 10, buf};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* label;
        double limit_seconds;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries = {
        {1, "gradient matches central finite differences", 5.0, criterion_gradient},
        {2, "solver matches the exhaustive 2x2 grid within 2%", 120.0, criterion_solver_grid},
        {3, "special-function round trips and closed forms", 5.0, criterion_specfun},
        {4, "empirical confidence of the certified bound", 600.0, criterion_confidence},
        {5, "identity rate sandwiched by gamma_star and kappa", 120.0, criterion_sandwich},
        {6, "inflation factor monotone in conditioning and samples", 5.0, criterion_inflation_monotone},
        {7, "method ordering over the budget grid", 3600.0, criterion_ordering},
        {8, "frozen-shape iteration contracts at the exact rate", 1.0, criterion_heuristic_contraction},
        {9, "both pairings yield the same optimal conditioning", 60.0, criterion_equivalence},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < e.limit_seconds;
        const bool pass = out.pass && in_time;
        failures += !pass;
        std::printf("%s  criterion %d: %s  [%s] (%.2fs%s)\n", pass ? "PASS" : "FAIL", e.id, e.label,
                    out.detail.c_str(), secs, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all 9 criteria passed\n");
    return failures ? 1 : 0;
}
