#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "jsrcert/adaptive.hpp"
#include "jsrcert/certify.hpp"
#include "jsrcert/experiment.hpp"
#include "jsrcert/sampling.hpp"
#include "jsrcert/system.hpp"

using namespace jsrcert;

namespace {

void apply_worker_env() {
#ifdef _OPENMP
    if (const char* env = std::getenv("JSRCERT_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int cmd_gen_system(int dim, int modes, double target, std::uint64_t seed, const std::string& out_path,
                   double cone_hi) {
    SwitchedSystem sys = gen_random_stable(dim, modes, target, seed, cone_hi);
    nlohmann::json meta;
    meta["generator"] = "gaussian-rescaled";
    meta["seed"] = seed;
    meta["target_cqlf"] = target;
    meta["modes"] = modes;
    save_system_json(sys, out_path, meta.dump());
    const CqlfResult ref = cqlf_bound(sys, cone_hi, 1e-5);
    std::printf("wrote %s (dim=%d, modes=%d, cqlf_bound=%.6f)\n", out_path.c_str(), sys.dim,
                sys.mode_count(), ref.gamma);
    return 0;
}

int cmd_consensus(const std::string& preset, const std::string& out_path) {
    std::vector<DirectedGraph> graphs;
    if (preset == "fig4") {
        graphs = {graph_preset("fig4-a"), graph_preset("fig4-b"), graph_preset("fig4-c")};
    } else {
        graphs = {graph_preset(preset)};
    }
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        const Matrix w = averaging_matrix(graphs[g]);
        std::printf("graph %zu: %d nodes, %zu edges, row sums:", g, graphs[g].node_count,
                    graphs[g].edges.size());
        for (int i = 0; i < w.rows(); ++i) {
            double s = 0.0;
            for (int j = 0; j < w.cols(); ++j) s += w(i, j);
            std::printf(" %.12f", s);
        }
        std::printf("\n");
    }
    SwitchedSystem sys = consensus_system(graphs);
    nlohmann::json meta;
    meta["generator"] = "consensus";
    meta["preset"] = preset;
    save_system_json(sys, out_path, meta.dump());
    std::printf("wrote %s (dim=%d, modes=%d)\n", out_path.c_str(), sys.dim, sys.mode_count());
    return 0;
}

struct CertifyArgs {
    std::string system_path;
    std::string dataset_path;
    std::string method = "fixed";
    std::int64_t samples = 200;
    double beta = 0.05;
    double alpha = 0.0;
    double cone_hi = 100.0;
    double basis_bound = 100.0;
    std::uint64_t seed = 1;
    bool fix_identity = false;
    std::string out_path;
    std::string trace_path;
    std::string dump_data_path;
};

int cmd_certify(const CertifyArgs& a) {
    Certificate cert;
    Trace trace;

    if (!a.dataset_path.empty()) {
        Dataset data = load_dataset_csv(a.dataset_path);
        const ConeConfig cone = ConeConfig::full(data.dim(), a.cone_hi);
        ConfidenceParams conf{a.beta, a.alpha > 0.0 ? a.alpha : 1.0,
                              static_cast<std::int64_t>(data.size())};
        cert = certify(data, cone, conf, a.fix_identity);
    } else {
        SwitchedSystem sys = load_system_json(a.system_path);
        ExperimentSpec spec;
        spec.system = sys;
        spec.methods = {a.method};
        spec.grid = {a.samples};
        spec.beta = a.beta;
        spec.alpha = a.alpha;
        spec.cone_hi = a.cone_hi;
        spec.basis_bound = a.basis_bound;
        spec.seed = a.seed;

        const ConeConfig cone = ConeConfig::full(sys.dim, a.cone_hi);
        const double alpha = a.alpha > 0.0 ? a.alpha : 1.0 / sys.mode_count();
        OracleStream oracle(sys, OracleConfig{{}, split_seed(a.seed, 1)});
        Rng rng(split_seed(a.seed, 2));

        if (!a.dump_data_path.empty() && a.method == "fixed") {
            CollectResult c = collect(oracle, BasisTransform::identity(sys.dim), static_cast<int>(a.samples), rng);
            save_dataset_csv(c.original, a.dump_data_path);
            ConfidenceParams conf{a.beta, alpha, a.samples};
            cert = certify(c.original, cone, conf, a.fix_identity);
        } else {
            CellResult cell = run_cell(sys, a.method, a.samples, a.seed, spec);
            if (!cell.row.error.empty()) {
                std::fprintf(stderr, "certification failed: %s\n", cell.row.error.c_str());
                return 1;
            }
            cert = *cell.certificate;
            trace = cell.trace;
        }
    }

    if (!a.trace_path.empty()) trace.save_csv(a.trace_path);
    const std::string text = cert.to_json();
    if (a.out_path.empty()) {
        std::printf("%s\n", text.c_str());
    } else {
        cert.save(a.out_path);
        std::printf("wrote %s\n", a.out_path.c_str());
    }
    if (cert.bound)
        std::printf("bound: %.6f (gamma_star=%.6f, kappa=%.4f, inflation=%.6f)\n", *cert.bound,
                    cert.gamma_star, cert.kappa_value, cert.inflation);
    else
        std::printf("not certifiable at N=%lld (inflation infinite)\n",
                    static_cast<long long>(cert.n_samples));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_worker_env();

    CLI::App app{"Data-driven stability certification for black-box switched linear systems"};
    app.require_subcommand(1);

    // gen-system
    auto* gen = app.add_subcommand("gen-system", "Generate a random stable system file");
    int g_dim = 3, g_modes = 3;
    double g_target = 0.9, g_cone = 100.0;
    std::uint64_t g_seed = 1;
    std::string g_out = "system.json";
    gen->add_option("--dim", g_dim, "State dimension")->check(CLI::PositiveNumber);
    gen->add_option("--modes", g_modes, "Number of modes")->check(CLI::PositiveNumber);
    gen->add_option("--target-cqlf", g_target, "Model-based bound of the generated system")
        ->check(CLI::PositiveNumber);
    gen->add_option("--seed", g_seed, "Generator seed");
    gen->add_option("--cone-hi", g_cone, "Upper eigenvalue of the reference cone");
    gen->add_option("--out", g_out, "Output path");

    // consensus
    auto* cons = app.add_subcommand("consensus", "Build a consensus-network system file");
    std::string c_preset = "fig4";
    std::string c_out = "consensus.json";
    cons->add_option("--preset", c_preset, "fig4 | fig4-a | fig4-b | fig4-c | complete6");
    cons->add_option("--out", c_out, "Output path");

    // certify
    auto* cert = app.add_subcommand("certify", "Run one method and print its certificate");
    CertifyArgs ca;
    cert->add_option("--system", ca.system_path, "System JSON file");
    cert->add_option("--dataset", ca.dataset_path, "Certify a stored dataset CSV instead of sampling");
    cert->add_option("--method", ca.method, "fixed | sgd | two-step | heuristic");
    cert->add_option("--samples", ca.samples, "Total sample budget")->check(CLI::PositiveNumber);
    cert->add_option("--beta", ca.beta, "1 - confidence");
    cert->add_option("--alpha", ca.alpha, "Mode probability lower bound (0: uniform 1/m)");
    cert->add_option("--cone-hi", ca.cone_hi, "Upper eigenvalue of the search cone");
    cert->add_option("--basis-bound", ca.basis_bound, "Upper eigenvalue of the basis box");
    cert->add_option("--seed", ca.seed, "Run seed");
    cert->add_flag("--fix-identity", ca.fix_identity, "Pin P = I (d = 1)");
    cert->add_option("--out", ca.out_path, "Write the certificate JSON here");
    cert->add_option("--trace", ca.trace_path, "Write the learning trace CSV here");
    cert->add_option("--dump-data", ca.dump_data_path, "Also save the collected dataset (fixed method)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Compare methods over a budget grid");
    std::string s_system, s_methods = "fixed,sgd,two-step,heuristic";
    std::string s_grid = "200,400,800,1600,3200";
    int s_repeats = 10;
    double s_beta = 0.05, s_alpha = 0.0, s_cone = 100.0, s_basis = 100.0;
    std::uint64_t s_seed = 1;
    std::string s_out = "results.csv", s_summary;
    sweep->add_option("--system", s_system, "System JSON file")->required();
    sweep->add_option("--methods", s_methods, "Comma-separated method list");
    sweep->add_option("--grid", s_grid, "Comma-separated ascending budgets");
    sweep->add_option("--repeats", s_repeats, "Repeats per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--beta", s_beta, "1 - confidence");
    sweep->add_option("--alpha", s_alpha, "Mode probability lower bound (0: uniform 1/m)");
    sweep->add_option("--cone-hi", s_cone, "Upper eigenvalue of the search cone");
    sweep->add_option("--basis-bound", s_basis, "Upper eigenvalue of the basis box");
    sweep->add_option("--seed", s_seed, "Master seed");
    sweep->add_option("--out", s_out, "Results CSV path");
    sweep->add_option("--summary", s_summary, "Summary JSON path");

    // validate
    auto* val = app.add_subcommand("validate", "Monte Carlo check of the confidence bound");
    std::string v_system, v_method = "fixed", v_report;
    std::int64_t v_samples = 100;
    double v_beta = 0.2;
    int v_trials = 200;
    std::uint64_t v_seed = 1;
    double v_cone = 100.0, v_basis = 100.0, v_alpha = 0.0;
    val->add_option("--system", v_system, "System JSON file (needed to compute true rates)")->required();
    val->add_option("--method", v_method, "fixed | sgd | two-step | heuristic");
    val->add_option("--samples", v_samples, "Samples per trial")->check(CLI::PositiveNumber);
    val->add_option("--beta", v_beta, "1 - confidence");
    val->add_option("--alpha", v_alpha, "Mode probability lower bound (0: uniform 1/m)");
    val->add_option("--trials", v_trials, "Number of independent certifications")->check(CLI::PositiveNumber);
    val->add_option("--seed", v_seed, "Master seed");
    val->add_option("--cone-hi", v_cone, "Upper eigenvalue of the search cone");
    val->add_option("--basis-bound", v_basis, "Upper eigenvalue of the basis box");
    val->add_option("--report", v_report, "Write the report JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_system(g_dim, g_modes, g_target, g_seed, g_out, g_cone);
        if (cons->parsed()) return cmd_consensus(c_preset, c_out);
        if (cert->parsed()) {
            if (ca.system_path.empty() && ca.dataset_path.empty()) {
                std::fprintf(stderr, "certify: need --system or --dataset\n");
                return 1;
            }
            return cmd_certify(ca);
        }
        if (sweep->parsed()) {
            ExperimentSpec spec;
            spec.system = load_system_json(s_system);
            spec.methods = split_list(s_methods);
            for (const std::string& tok : split_list(s_grid)) spec.grid.push_back(std::stoll(tok));
            spec.repeats = s_repeats;
            spec.beta = s_beta;
            spec.alpha = s_alpha;
            spec.cone_hi = s_cone;
            spec.basis_bound = s_basis;
            spec.seed = s_seed;
            SweepResult result = run_sweep(spec);
            save_rows_csv(result.rows, s_out);
            if (!s_summary.empty()) save_summary_json(result, s_summary);
            int failed = 0;
            for (const ResultRow& r : result.rows) failed += !r.error.empty();
            std::printf("wrote %s (%zu rows, %d failed cells)\n", s_out.c_str(), result.rows.size(), failed);
            return 0;
        }
        if (val->parsed()) {
            ExperimentSpec base;
            base.system = load_system_json(v_system);
            base.methods = {v_method};
            base.grid = {v_samples};
            base.alpha = v_alpha;
            base.cone_hi = v_cone;
            base.basis_bound = v_basis;
            ValidationReport rep = run_validation(base.system, v_method, v_samples, v_beta, v_trials,
                                                  v_seed, base);
            if (!v_report.empty()) {
                std::ofstream out(v_report);
                out << rep.to_json() << "\n";
            }
            std::printf("%s\n", rep.to_json().c_str());
            if (rep.verdict_valid) {
                std::printf("validate: %s (violations %d/%d, threshold %.4f)\n",
                            rep.pass ? "PASS" : "FAIL", rep.violations, rep.trials, rep.threshold);
                return rep.pass ? 0 : 2;
            }
            std::printf("validate: single trial, verdict suppressed\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
