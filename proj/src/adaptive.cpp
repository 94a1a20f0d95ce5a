#include "jsrcert/adaptive.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace jsrcert {

double objective(const Matrix& b, const SymMatrix& p) {
    if (b.rows() != b.cols() || b.rows() != p.dim())
        throw std::invalid_argument("objective: dimension mismatch");
    const SymMatrix a = SymMatrix::symmetrized((transpose(b) * p.mat()) * b);
    return log_kappa(a);
}

GradientResult grad_log_kappa(const Matrix& b, const SymMatrix& p) {
    const int n = p.dim();
    if (b.rows() != n || b.cols() != n) throw std::invalid_argument("grad_log_kappa: dimension mismatch");
    const SymMatrix b_sym(b);  // rejects non-symmetric bases
    const SymMatrix a = SymMatrix::symmetrized((transpose(b) * p.mat()) * b);
    EigenPair e = sym_eig(a);
    if (e.values.front() <= 0.0)
        throw std::invalid_argument("grad_log_kappa: B'PB is not positive definite");

    GradientResult out;
    out.lambda_min = e.values.front();
    out.multiplicity_flag =
        n >= 2 && (e.values[1] - e.values[0]) <= 1e-9 * std::max(e.values[1], 1e-300);

    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = e.vectors(i, 0);

    const Matrix b_inv = spd_inverse(b_sym).mat();
    const Matrix rank_one = (p.mat() * b) * outer(v, v);
    out.grad = b_inv - (static_cast<double>(n) / out.lambda_min) * rank_one;
    return out;
}

void Trace::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out << "k,samples_spent,log_kappa,grad_norm,basis_frobenius_delta\n";
    char buf[128];
    for (const TraceRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g\n", r.k,
                      static_cast<long long>(r.samples_spent), r.log_kappa, r.grad_norm, r.basis_delta);
        out << buf;
    }
}

namespace {

double default_sgd_step(int k) { return 0.3 / (k + 1.0); }

bool late_conditioning_small(const Trace& trace) {
    if (trace.rows.empty()) return false;
    const std::size_t take = std::min<std::size_t>(3, trace.rows.size());
    double mean = 0.0;
    for (std::size_t i = trace.rows.size() - take; i < trace.rows.size(); ++i)
        mean += trace.rows[i].log_kappa;
    mean /= static_cast<double>(take);
    return mean <= std::log(1.1);
}

}  // namespace

RunResult run_sgd(Oracle& oracle, Rng& rng, const SgdConfig& cfg, const ConeConfig& cone,
                  double beta, double alpha, const SolveOptions& opt) {
    if (cfg.iterations < 0) throw std::invalid_argument("run_sgd: iterations must be >= 0");
    if (cfg.batch_size < cone.d)
        throw std::invalid_argument("run_sgd: batch size must be >= d of the search cone");
    const int n = oracle.dim();
    const auto step = cfg.step_size ? cfg.step_size : default_sgd_step;

    RunResult res;
    SymMatrix b = SymMatrix::identity(n);
    res.iterates.push_back(b);
    std::int64_t spent = 0;

    for (int k = 0; k < cfg.iterations; ++k) {
        BasisTransform basis(b, 1.0, cfg.basis_bound);
        CollectResult batch = collect(oracle, basis, cfg.batch_size, rng);
        spent += cfg.batch_size;
        SpdSolution sol = solve_gamma_star(batch.transformed, cone, opt);
        GradientResult g = grad_log_kappa(b.mat(), sol.p);
        SymMatrix b_next = project_box(b.mat() - step(k) * g.grad, 1.0, cfg.basis_bound);
        res.trace.rows.push_back({k, spent, objective(b.mat(), sol.p), frobenius_norm(g.grad),
                                  frobenius_norm(b_next.mat() - b.mat())});
        b = b_next;
        res.iterates.push_back(b);
    }

    const int final_n = cfg.final_samples > 0 ? cfg.final_samples : cfg.batch_size;
    BasisTransform basis(b, 1.0, cfg.basis_bound);
    CollectResult final_batch = collect(oracle, basis, final_n, rng);
    spent += final_n;

    const bool fix_identity = cfg.auto_fix_identity && late_conditioning_small(res.trace);
    ConfidenceParams conf{beta, alpha, final_n};
    res.certificate = certify(final_batch.original, cone, conf, fix_identity, opt);
    res.certificate.samples_spent = spent;
    res.basis = b;
    return res;
}

RunResult run_heuristic(Oracle& oracle, Rng& rng, const HeuristicConfig& cfg, const ConeConfig& cone,
                        double beta, double alpha, const SolveOptions& opt, SolveFn solve_override) {
    if (cfg.initial_samples < 1) throw std::invalid_argument("run_heuristic: initial_samples must be >= 1");
    if (cfg.total_budget <= cfg.initial_samples)
        throw std::invalid_argument("run_heuristic: total budget must exceed the initial sample size");
    if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) throw std::invalid_argument("run_heuristic: eta outside [0,1]");
    const int n = oracle.dim();

    // Each round appends one sample, so the previous optimum is an excellent
    // incumbent for the next solve.
    SymMatrix warm;
    bool have_warm = false;
    const bool overridden = static_cast<bool>(solve_override);
    SolveFn solve = overridden ? std::move(solve_override) : SolveFn([&](const Dataset& d) {
        return solve_gamma_star(d, cone, opt, have_warm ? &warm : nullptr);
    });

    RunResult res;
    SymMatrix b = SymMatrix::identity(n);
    res.iterates.push_back(b);

    CollectResult init = collect(oracle, BasisTransform(b), cfg.initial_samples, rng);
    Dataset accumulated = init.transformed;
    std::int64_t spent = cfg.initial_samples;

    std::deque<double> recent_deltas;
    for (int k = 0; k < cfg.max_iterations; ++k) {
        SpdSolution sol = solve(accumulated);
        // Tie-break toward the incumbent: near the optimum the solver wanders
        // within its gamma tolerance, and a twitching whitener target would
        // keep the convergence window from ever closing.
        if (have_warm && !overridden) {
            const double incumbent_rate = rho_hat(accumulated, warm, opt.policy);
            if (incumbent_rate <= sol.gamma * (1.0 + opt.gamma_tol)) {
                sol.p = warm;
                sol.gamma = incumbent_rate;
                sol.eig = sym_eig(warm);
                sol.kappa_value = kappa(warm);
            }
        }
        warm = sol.p;
        have_warm = true;
        const SymMatrix whitener = inv_sqrt(sol.p);
        const Matrix direction = b.mat() - whitener.mat();
        SymMatrix b_next = SymMatrix::symmetrized(b.mat() - cfg.eta * direction);
        const double delta = frobenius_norm(b_next.mat() - b.mat());

        recent_deltas.push_back(delta);
        if (static_cast<int>(recent_deltas.size()) > cfg.window + 1) recent_deltas.pop_front();

        res.trace.rows.push_back(
            {k, spent, objective(b.mat(), sol.p), frobenius_norm(direction), delta});
        b = b_next;
        res.iterates.push_back(b);

        if (std::accumulate(recent_deltas.begin(), recent_deltas.end(), 0.0) <= cfg.eps) {
            res.converged = true;
            break;
        }
        if (spent >= cfg.total_budget) break;

        CollectResult one = collect(oracle, BasisTransform(b), 1, rng);
        accumulated.append(one.transformed.samples[0], one.transformed.basis_tag);
        spent += 1;
    }

    const std::int64_t remaining = cfg.total_budget - spent;
    if (remaining <= 0) throw std::runtime_error("run_heuristic: empty certification budget");

    CollectResult final_batch = collect(oracle, BasisTransform(b), static_cast<int>(remaining), rng);
    spent += remaining;
    ConfidenceParams conf{beta, alpha, remaining};
    res.certificate = certify(final_batch.original, cone, conf, false, opt);
    res.certificate.samples_spent = spent;
    res.basis = b;
    return res;
}

RunResult run_two_step(Oracle& oracle, Rng& rng, int initial_samples, std::int64_t total_samples,
                       const ConeConfig& cone, double beta, double alpha, double basis_bound,
                       const SolveOptions& opt) {
    if (initial_samples < cone.d)
        throw std::invalid_argument("run_two_step: initial sample size must be >= d");
    if (total_samples - initial_samples < cone.d)
        throw std::invalid_argument("run_two_step: certification share must be >= d");
    const int n = oracle.dim();

    RunResult res;
    CollectResult first = collect(oracle, BasisTransform::identity(n, basis_bound), initial_samples, rng);
    SpdSolution sol = solve_gamma_star(first.original, cone, opt);

    // Whiten the exploratory P, rescaled so the smallest eigenvalue sits at 1
    // (the guessed basis is scale-free), then clip into the box.
    const SymMatrix s = inv_sqrt(sol.p);
    const double lam_max_p = sol.eig.values.back();
    SymMatrix b = project_box(std::sqrt(lam_max_p) * s.mat(), 1.0, basis_bound);

    const std::int64_t cert_n = total_samples - initial_samples;
    CollectResult second = collect(oracle, BasisTransform(b, 1.0, basis_bound),
                                   static_cast<int>(cert_n), rng);
    ConfidenceParams conf{beta, alpha, cert_n};
    res.certificate = certify(second.original, cone, conf, false, opt);
    res.certificate.samples_spent = total_samples;
    res.basis = b;
    res.iterates = {SymMatrix::identity(n), b};
    return res;
}

RunResult run_fixed(Oracle& oracle, Rng& rng, std::int64_t n_samples, const ConeConfig& cone,
                    double beta, double alpha, const SolveOptions& opt, bool fix_identity) {
    const int n = oracle.dim();
    RunResult res;
    CollectResult batch = collect(oracle, BasisTransform::identity(n), static_cast<int>(n_samples), rng);
    ConfidenceParams conf{beta, alpha, n_samples};
    res.certificate = certify(batch.original, cone, conf, fix_identity, opt);
    res.certificate.samples_spent = n_samples;
    res.basis = SymMatrix::identity(n);
    res.iterates = {res.basis};
    return res;
}

}  // namespace jsrcert
