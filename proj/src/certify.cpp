#include "jsrcert/certify.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace jsrcert {

double rho_hat(const Dataset& data, const SymMatrix& p, ExecPolicy policy) {
    if (data.samples.empty()) throw std::invalid_argument("rho_hat: empty dataset");
    for (const OneStepSample& s : data.samples)
        if (norm2(s.x) == 0.0) throw std::invalid_argument("rho_hat: zero initial state in dataset");
    return std::sqrt(max_ratio_sq(data.samples, p, policy).ratio_sq);
}

namespace {

WorstFn dataset_worst_fn(const Dataset& data, ExecPolicy policy) {
    return [&data, policy](const SymMatrix& p) {
        MaxRatio r = max_ratio_sq(data.samples, p, policy);
        const OneStepSample& s = data.samples[r.index];
        return WorstCase{r.ratio_sq, s.x, s.y, r.index};
    };
}

}  // namespace

FeasResult feasibility_search(const Dataset& data, double gamma, const ConeConfig& cone,
                              const FeasOptions& opt, const SymMatrix* warm_start, ExecPolicy policy) {
    if (data.samples.empty()) throw std::invalid_argument("feasibility_search: empty dataset");
    if (!(gamma >= 0.0)) throw std::invalid_argument("feasibility_search: gamma must be >= 0");
    WorstFn worst = dataset_worst_fn(data, policy);
    return min_violation_search(worst, data.dim(), gamma, cone.cone_hi, opt, warm_start);
}

SpdSolution solve_gamma_star(const Dataset& data, const ConeConfig& cone, const SolveOptions& opt,
                             const SymMatrix* warm_start) {
    if (data.samples.empty()) throw std::invalid_argument("solve_gamma_star: empty dataset");
    const int n = data.dim();
    const SymMatrix eye = SymMatrix::identity(n);
    const double hi0 = rho_hat(data, eye, opt.policy);

    SpdSolution sol;
    sol.dataset_tag = data.basis_tag;

    WorstFn worst = dataset_worst_fn(data, opt.policy);
    double start_hi = hi0;
    const SymMatrix* start_p = nullptr;
    if (warm_start && warm_start->dim() == n) {
        const double warm_rate = rho_hat(data, *warm_start, opt.policy);
        if (warm_rate < hi0) {
            start_hi = warm_rate;
            start_p = warm_start;
        }
    }
    BisectResult br = bisect_gamma(worst, n, start_hi, cone.cone_hi, opt.bisect_iters,
                                   opt.gamma_tol, opt.feas, start_p);
    double gamma_p = rho_hat(data, br.p, opt.policy);
    // One refinement pass from the incumbent; rescues stages the first pass
    // declared infeasible from a poor warm start.
    BisectResult br2 = bisect_gamma(worst, n, std::min(gamma_p, hi0), cone.cone_hi,
                                    opt.bisect_iters, opt.gamma_tol, opt.feas, &br.p);
    const double gamma_p2 = rho_hat(data, br2.p, opt.policy);
    if (gamma_p2 < gamma_p) {
        br.p = br2.p;
        gamma_p = gamma_p2;
    }
    if (gamma_p <= hi0) {
        sol.p = br.p;
        sol.gamma = gamma_p;
    } else {
        sol.p = eye;
        sol.gamma = hi0;
    }
    sol.eig = sym_eig(sol.p);
    sol.kappa_value = kappa(sol.p);
    return sol;
}

double inflation_factor(double beta, double k, std::int64_t n_samples, int d, double alpha, int dim) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("inflation_factor: beta outside (0,1]");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("inflation_factor: alpha outside (0,1]");
    if (!(k >= 1.0)) throw std::domain_error("inflation_factor: conditioning k must be >= 1");
    if (d < 1 || n_samples < d) throw std::domain_error("inflation_factor: need N >= d >= 1");
    if (dim < 2) throw std::domain_error("inflation_factor: state dimension must be >= 2");

    const double eps = inv_binom_tail(beta, d - 1, n_samples);
    const double u = (k / alpha) * eps;
    if (u >= 1.0) return std::numeric_limits<double>::infinity();
    const double x = inv_inc_beta(u, BetaParams{(dim - 1) / 2.0, 0.5});
    if (x >= 1.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(1.0 - x);
}

Certificate certify(const Dataset& data, const ConeConfig& cone, const ConfidenceParams& conf,
                    bool fix_identity, const SolveOptions& opt) {
    if (data.samples.empty()) throw std::invalid_argument("certify: empty dataset");
    if (data.mixed_basis)
        throw std::invalid_argument("certify: dataset mixes collection bases; the confidence bound "
                                    "requires one sampling distribution");
    if (conf.n_samples != static_cast<std::int64_t>(data.size()))
        throw std::invalid_argument("certify: conf.n_samples does not match dataset size");
    const int n = data.dim();

    Certificate cert;
    cert.beta = conf.beta;
    cert.alpha = conf.alpha;
    cert.n_samples = conf.n_samples;
    cert.dim = n;
    cert.basis_tag = data.basis_tag;
    cert.samples_spent = conf.n_samples;

    if (fix_identity) {
        cert.d = 1;
        cert.p_star = SymMatrix::identity(n);
        cert.gamma_star = rho_hat(data, cert.p_star, opt.policy);
        cert.kappa_value = 1.0;
    } else {
        cert.d = cone.d > 0 ? cone.d : n * (n + 1) / 2;
        if (conf.n_samples < cert.d)
            throw std::invalid_argument("certify: need at least d samples (N >= d)");
        SpdSolution sol = solve_gamma_star(data, cone, opt);
        cert.p_star = sol.p;
        cert.gamma_star = sol.gamma;
        cert.kappa_value = sol.kappa_value;
    }

    cert.inflation = inflation_factor(conf.beta, cert.kappa_value, conf.n_samples, cert.d, conf.alpha, n);
    if (std::isfinite(cert.inflation)) cert.bound = cert.gamma_star * cert.inflation;
    return cert;
}

std::string Certificate::to_json() const {
    nlohmann::json j;
    j["gamma_star"] = gamma_star;
    j["kappa"] = kappa_value;
    if (std::isfinite(inflation))
        j["inflation"] = inflation;
    else
        j["inflation"] = nullptr;
    if (bound)
        j["bound"] = *bound;
    else
        j["bound"] = nullptr;
    j["beta"] = beta;
    j["alpha"] = alpha;
    j["N"] = n_samples;
    j["d"] = d;
    j["n"] = dim;
    j["basis"] = basis_tag;
    j["samples_spent"] = samples_spent;
    j["P_star"] = p_star.mat().data();
    return j.dump(2);
}

Certificate Certificate::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Certificate c;
    c.gamma_star = j.at("gamma_star").get<double>();
    c.kappa_value = j.at("kappa").get<double>();
    c.inflation = j.at("inflation").is_null() ? std::numeric_limits<double>::infinity()
                                              : j.at("inflation").get<double>();
    if (!j.at("bound").is_null()) c.bound = j.at("bound").get<double>();
    c.beta = j.at("beta").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.n_samples = j.at("N").get<std::int64_t>();
    c.d = j.at("d").get<int>();
    c.dim = j.at("n").get<int>();
    c.basis_tag = j.at("basis").get<std::string>();
    c.samples_spent = j.value("samples_spent", c.n_samples);
    std::vector<double> flat = j.at("P_star").get<std::vector<double>>();
    if (flat.size() != static_cast<size_t>(c.dim) * c.dim)
        throw std::runtime_error("certificate: P_star entry count does not match n");
    Matrix p(c.dim, c.dim);
    p.data() = std::move(flat);
    c.p_star = SymMatrix(std::move(p));
    return c;
}

void Certificate::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write certificate: " + path);
    out << to_json() << "\n";
}

Certificate Certificate::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read certificate: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

}  // namespace jsrcert
