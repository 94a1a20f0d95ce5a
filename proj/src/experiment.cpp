#include "jsrcert/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace jsrcert {

void ExperimentSpec::validate() const {
    system.validate();
    if (methods.empty()) throw std::invalid_argument("sweep: no methods given");
    for (const std::string& m : methods)
        if (m != "fixed" && m != "sgd" && m != "two-step" && m != "heuristic")
            throw std::invalid_argument("sweep: unknown method '" + m + "'");
    if (grid.empty()) throw std::invalid_argument("sweep: empty budget grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw std::invalid_argument("sweep: grid must be strictly ascending");
    if (repeats < 1) throw std::invalid_argument("sweep: repeats must be >= 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("sweep: beta outside (0,1]");
}

namespace {

double spec_alpha(const ExperimentSpec& spec) {
    return spec.alpha > 0.0 ? spec.alpha : 1.0 / spec.system.mode_count();
}

}  // namespace

CellResult run_cell(const SwitchedSystem& sys, const std::string& method, std::int64_t n_total,
                    std::uint64_t cell_seed, const ExperimentSpec& spec) {
    CellResult out;
    out.row.method = method;
    out.row.n_total = n_total;
    out.row.seed = cell_seed;

    const ConeConfig cone = ConeConfig::full(sys.dim, spec.cone_hi);
    const double alpha = spec_alpha(spec);
    OracleStream oracle(sys, OracleConfig{{}, split_seed(cell_seed, 1)});
    Rng draw_rng(split_seed(cell_seed, 2));

    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunResult run;
        if (method == "fixed") {
            run = run_fixed(oracle, draw_rng, n_total, cone, spec.beta, alpha, spec.solve);
        } else if (method == "sgd") {
            SgdConfig cfg;
            cfg.batch_size = spec.params.sgd_batch;
            // Gradient batches take at most half the budget; the remainder
            // funds the certificate, whose inflation factor shrinks with N.
            cfg.iterations = static_cast<int>(n_total / (2 * cfg.batch_size));
            cfg.final_samples = spec.params.sgd_final > 0
                                    ? spec.params.sgd_final
                                    : static_cast<int>(n_total - static_cast<std::int64_t>(cfg.iterations) *
                                                                     cfg.batch_size);
            const double eta0 = spec.params.sgd_eta0;
            cfg.step_size = [eta0](int k) { return eta0 / (k + 1.0); };
            cfg.basis_bound = spec.basis_bound;
            run = run_sgd(oracle, draw_rng, cfg, cone, spec.beta, alpha, spec.solve);
        } else if (method == "two-step") {
            const std::int64_t n0 = spec.params.two_step_initial > 0
                                        ? spec.params.two_step_initial
                                        : std::min<std::int64_t>(n_total / 2, 500);
            run = run_two_step(oracle, draw_rng, static_cast<int>(n0), n_total, cone, spec.beta, alpha,
                               spec.basis_bound, spec.solve);
        } else if (method == "heuristic") {
            HeuristicConfig cfg;
            cfg.initial_samples = spec.params.heur_initial > 0
                                      ? spec.params.heur_initial
                                      : static_cast<int>(std::min<std::int64_t>(
                                            200, std::max<std::int64_t>(cone.d, n_total / 4)));
            cfg.total_budget = n_total;
            cfg.max_iterations = static_cast<int>(n_total / 2);
            cfg.eta = spec.params.heur_eta;
            cfg.eps = spec.params.heur_eps;
            cfg.window = spec.params.heur_window;
            run = run_heuristic(oracle, draw_rng, cfg, cone, spec.beta, alpha, spec.solve);
        } else {
            throw std::invalid_argument("unknown method: " + method);
        }
        out.certificate = run.certificate;
        out.trace = run.trace;
        out.row.gamma_star = run.certificate.gamma_star;
        out.row.kappa_value = run.certificate.kappa_value;
        out.row.inflation = run.certificate.inflation;
        out.row.bound = run.certificate.bound;
        out.row.samples_spent = run.certificate.samples_spent;
    } catch (const std::exception& e) {
        out.row.error = e.what();
        out.row.gamma_star = std::numeric_limits<double>::quiet_NaN();
        out.row.kappa_value = std::numeric_limits<double>::quiet_NaN();
        out.row.inflation = std::numeric_limits<double>::quiet_NaN();
    }
    out.row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
    spec.validate();

    struct Cell {
        std::string method;
        std::int64_t n_total;
        int repeat;
    };
    std::vector<Cell> cells;
    for (const std::string& m : spec.methods)
        for (std::int64_t n : spec.grid)
            for (int r = 0; r < spec.repeats; ++r) cells.push_back({m, n, r});

    std::vector<ResultRow> rows(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cells.size()); ++i) {
        const Cell& c = cells[static_cast<std::size_t>(i)];
        // Seed depends on (N, repeat) only: methods compare on paired randomness.
        const std::uint64_t cell_seed =
            split_seed(spec.seed, static_cast<std::uint64_t>(c.n_total), static_cast<std::uint64_t>(c.repeat));
        rows[static_cast<std::size_t>(i)] = run_cell(spec.system, c.method, c.n_total, cell_seed, spec).row;
    }

    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.n_total != b.n_total) return a.n_total < b.n_total;
        return a.seed < b.seed;
    });

    SweepResult result;
    result.rows = std::move(rows);
    for (const std::string& m : spec.methods) {
        for (std::int64_t n : spec.grid) {
            SummaryRow s;
            s.method = m;
            s.n_total = n;
            double bound_sum = 0.0, bound_sq = 0.0, gamma_sum = 0.0, kappa_sum = 0.0;
            int ok = 0;
            for (const ResultRow& r : result.rows) {
                if (r.method != m || r.n_total != n) continue;
                ++s.repeats;
                if (!r.error.empty()) continue;
                gamma_sum += r.gamma_star;
                kappa_sum += r.kappa_value;
                ++ok;
                if (r.bound) {
                    ++s.certified;
                    bound_sum += *r.bound;
                    bound_sq += *r.bound * *r.bound;
                }
            }
            if (ok > 0) {
                s.gamma_mean = gamma_sum / ok;
                s.kappa_mean = kappa_sum / ok;
            }
            if (s.certified == s.repeats && s.repeats > 0) {
                const double mean = bound_sum / s.repeats;
                s.bound_mean = mean;
                s.bound_std = std::sqrt(std::max(0.0, bound_sq / s.repeats - mean * mean));
            }
            result.summary.push_back(std::move(s));
        }
    }
    return result;
}

void save_rows_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results: " + path);
    out << "method,N,seed,gamma_star,kappa,inflation,bound,samples_spent,wall_time\n";
    char buf[64];
    for (const ResultRow& r : rows) {
        out << r.method << "," << r.n_total << "," << r.seed << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.gamma_star);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.kappa_value);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.inflation);
        out << buf << ",";
        if (r.bound) {
            std::snprintf(buf, sizeof(buf), "%.17g", *r.bound);
            out << buf;
        } else {
            out << "NONE";
        }
        out << "," << r.samples_spent << ",";
        std::snprintf(buf, sizeof(buf), "%.6f", r.wall_seconds);
        out << buf << "\n";
    }
}

void save_summary_json(const SweepResult& result, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const SummaryRow& s : result.summary) {
        nlohmann::json row;
        row["method"] = s.method;
        row["N"] = s.n_total;
        row["repeats"] = s.repeats;
        row["certified"] = s.certified;
        row["bound_mean"] = s.bound_mean ? nlohmann::json(*s.bound_mean) : nlohmann::json(nullptr);
        row["bound_std"] = s.bound_std ? nlohmann::json(*s.bound_std) : nlohmann::json(nullptr);
        row["gamma_mean"] = s.gamma_mean;
        row["kappa_mean"] = s.kappa_mean;
        j.push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write summary: " + path);
    out << j.dump(2) << "\n";
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["trials"] = trials;
    j["violations"] = violations;
    j["uncertified"] = uncertified;
    j["failed"] = failed;
    j["violation_fraction"] = violation_fraction;
    j["threshold"] = threshold;
    j["ci_low"] = ci_low;
    j["ci_high"] = ci_high;
    j["verdict_valid"] = verdict_valid;
    if (verdict_valid)
        j["pass"] = pass;
    else
        j["pass"] = nullptr;
    return j.dump(2);
}

ValidationReport run_validation(const SwitchedSystem& sys, const std::string& method,
                                std::int64_t n_samples, double beta, int trials,
                                std::uint64_t seed, const ExperimentSpec& base) {
    sys.validate();
    if (trials < 1) throw std::invalid_argument("validate: trials must be >= 1");

    ExperimentSpec spec = base;
    spec.system = sys;
    spec.beta = beta;

    std::vector<int> verdict(trials, 0);  // 0 ok, 1 violation, 2 no bound, 3 failed
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t cell_seed = split_seed(seed, static_cast<std::uint64_t>(t), 0xFEED);
        CellResult cell = run_cell(sys, method, n_samples, cell_seed, spec);
        if (!cell.row.error.empty()) {
            verdict[t] = 3;
        } else if (!cell.row.bound) {
            verdict[t] = 2;  // no claim made
        } else {
            const double true_rate = contraction_rate(sys, cell.certificate->p_star);
            verdict[t] = true_rate > *cell.row.bound ? 1 : 0;
        }
    }

    ValidationReport rep;
    rep.trials = trials;
    for (int v : verdict) {
        rep.violations += v == 1;
        rep.uncertified += v == 2;
        rep.failed += v == 3;
    }
    rep.violation_fraction = static_cast<double>(rep.violations) / trials;
    rep.threshold = beta + 3.0 * std::sqrt(beta * (1.0 - beta) / trials);
    const double half = 2.5758 * std::sqrt(std::max(0.0, rep.violation_fraction *
                                                             (1.0 - rep.violation_fraction) / trials));
    rep.ci_low = std::max(0.0, rep.violation_fraction - half);
    rep.ci_high = std::min(1.0, rep.violation_fraction + half);
    rep.verdict_valid = trials > 1;
    rep.pass = rep.violation_fraction <= rep.threshold;
    return rep;
}

}  // namespace jsrcert
