#include "jsrcert/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "jsrcert/kernels.hpp"

namespace jsrcert {

void SwitchedSystem::validate() const {
    if (modes.empty()) throw std::invalid_argument("SwitchedSystem: needs at least one mode");
    if (dim < 1) throw std::invalid_argument("SwitchedSystem: dim must be >= 1");
    for (const Matrix& a : modes)
        if (a.rows() != dim || a.cols() != dim)
            throw std::invalid_argument("SwitchedSystem: mode shape mismatch");
}

OracleStream::OracleStream(SwitchedSystem sys, OracleConfig cfg)
    : sys_(std::move(sys)), rng_(cfg.rng_seed) {
    sys_.validate();
    Vec probs = cfg.mode_probabilities;
    if (probs.empty()) probs.assign(sys_.modes.size(), 1.0 / static_cast<double>(sys_.modes.size()));
    if (probs.size() != sys_.modes.size())
        throw std::invalid_argument("OracleConfig: probability count != mode count");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p > 0.0)) throw std::invalid_argument("OracleConfig: every mode needs probability > 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("OracleConfig: probabilities must sum to 1");
    cumulative_.resize(probs.size());
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cumulative_[i] = acc;
    }
    cumulative_.back() = 1.0;
}

double OracleStream::min_mode_probability() const {
    double prev = 0.0;
    double lo = 1.0;
    for (double c : cumulative_) {
        lo = std::min(lo, c - prev);
        prev = c;
    }
    return lo;
}

Vec OracleStream::step(const Vec& x) {
    if (static_cast<int>(x.size()) != sys_.dim)
        throw std::invalid_argument("OracleStream::step: state dimension mismatch");
    const double u = rng_.uniform();
    int mode = 0;
    while (mode + 1 < static_cast<int>(cumulative_.size()) && u >= cumulative_[mode]) ++mode;
    if (log_modes_) mode_log_.push_back(mode);
    return matvec(sys_.modes[mode], x);
}

double spectral_radius_estimate(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius_estimate: not square");
    double nb = frobenius_norm(a);
    if (nb == 0.0) return 0.0;
    Matrix b = (1.0 / nb) * a;
    double log_scale = std::log(nb);
    const int doublings = 48;
    for (int k = 0; k < doublings; ++k) {
        b = b * b;
        nb = frobenius_norm(b);
        if (nb == 0.0) return 0.0;
        b = (1.0 / nb) * b;
        log_scale = 2.0 * log_scale + std::log(nb);
    }
    return std::exp(log_scale / std::exp2(doublings));
}

namespace {

struct SqrtPair {
    SymMatrix sqrt;
    SymMatrix inv_sqrt_m;
};

SqrtPair sqrt_pair(const SymMatrix& p) {
    EigenPair e = sym_eig(p);
    if (e.values.front() <= 0.0)
        throw std::invalid_argument("contraction_rate: P is not positive definite");
    const int n = p.dim();
    Matrix s(n, n), si(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double a = 0.0, b = 0.0;
            for (int k = 0; k < n; ++k) {
                const double vik = e.vectors(i, k) * e.vectors(j, k);
                a += vik * std::sqrt(e.values[k]);
                b += vik / std::sqrt(e.values[k]);
            }
            s(i, j) = s(j, i) = a;
            si(i, j) = si(j, i) = b;
        }
    }
    return {SymMatrix::symmetrized(s), SymMatrix::symmetrized(si)};
}

// Worst growth direction among the modes: top eigenpair of the symmetric
// similarity of each A'PA pencil.
WorstCase mode_worst(const SwitchedSystem& sys, const SymMatrix& p) {
    SqrtPair sp = sqrt_pair(p);
    WorstCase best;
    best.ratio_sq = -1.0;
    for (std::size_t mode = 0; mode < sys.modes.size(); ++mode) {
        const Matrix& a = sys.modes[mode];
        const Matrix t = (sp.sqrt.mat() * a) * sp.inv_sqrt_m.mat();
        EigenPair e = sym_eig(SymMatrix::symmetrized(transpose(t) * t));
        const double lam = e.values.back();
        if (lam > best.ratio_sq) {
            Vec u(p.dim());
            for (int i = 0; i < p.dim(); ++i) u[i] = e.vectors(i, p.dim() - 1);
            Vec xh = matvec(sp.inv_sqrt_m.mat(), u);
            best.ratio_sq = lam;
            best.y = matvec(a, xh);
            best.x = std::move(xh);
            best.index = mode;
        }
    }
    return best;
}

double det_by_elimination(Matrix a) {
    const int n = a.rows();
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(c, j));
            det = -det;
        }
        det *= a(c, c);
        for (int r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            for (int j = c; j < n; ++j) a(r, j) -= f * a(c, j);
        }
    }
    return det;
}

}  // namespace

double contraction_rate(const SwitchedSystem& sys, const SymMatrix& p) {
    sys.validate();
    if (p.dim() != sys.dim) throw std::invalid_argument("contraction_rate: P dimension mismatch");
    SqrtPair sp = sqrt_pair(p);
    double worst = 0.0;
    for (const Matrix& a : sys.modes) {
        const Matrix t = (sp.sqrt.mat() * a) * sp.inv_sqrt_m.mat();
        EigenPair e = sym_eig(SymMatrix::symmetrized(transpose(t) * t));
        worst = std::max(worst, e.values.back());
    }
    return std::sqrt(std::max(0.0, worst));
}

CqlfResult cqlf_bound(const SwitchedSystem& sys, double cone_hi, double tol, const FeasOptions& feas) {
    sys.validate();
    if (!(cone_hi > 1.0)) throw std::invalid_argument("cqlf_bound: cone_hi must be > 1");
    const SymMatrix eye = SymMatrix::identity(sys.dim);
    const double hi0 = contraction_rate(sys, eye);
    if (hi0 == 0.0) return {0.0, eye};
    WorstFn worst = [&](const SymMatrix& p) { return mode_worst(sys, p); };
    BisectResult br = bisect_gamma(worst, sys.dim, hi0, cone_hi, 40, tol, feas);
    double g = contraction_rate(sys, br.p);
    BisectResult br2 = bisect_gamma(worst, sys.dim, std::min(g, hi0), cone_hi, 40, tol, feas, &br.p);
    const double g2 = contraction_rate(sys, br2.p);
    if (g2 < g) {
        br.p = br2.p;
        g = g2;
    }
    if (g <= hi0) return {g, br.p};
    return {hi0, eye};
}

SwitchedSystem gen_random_stable(int dim, int mode_count, double target_cqlf, std::uint64_t seed,
                                 double cone_hi, double tol) {
    if (dim < 1 || mode_count < 1) throw std::invalid_argument("gen_random_stable: dim and modes must be >= 1");
    if (!(target_cqlf > 0.0)) throw std::invalid_argument("gen_random_stable: target_cqlf must be > 0");
    Rng rng(seed);
    SwitchedSystem sys;
    sys.dim = dim;
    sys.modes.reserve(mode_count);
    for (int m = 0; m < mode_count; ++m) {
        Matrix a(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = rng.gaussian();
        sys.modes.push_back(std::move(a));
    }
    const double c = cqlf_bound(sys, cone_hi, tol).gamma;
    if (!(c > 0.0)) throw std::runtime_error("gen_random_stable: degenerate draw (zero contraction rate)");
    const double scale = target_cqlf / c;
    for (Matrix& a : sys.modes) a = scale * a;
    // Barabanov screen: equal-modulus spectra collapse rho(A) onto |det A|^(1/n).
    for (const Matrix& a : sys.modes) {
        const double rho = spectral_radius_estimate(a);
        const double gm = std::pow(std::abs(det_by_elimination(a)), 1.0 / dim);
        if (dim > 1 && rho - gm <= 1e-9 * std::max(1.0, rho))
            throw std::runtime_error("gen_random_stable: drawn mode has (near) equal-modulus spectrum; pick another seed");
    }
    return sys;
}

void DirectedGraph::validate() const {
    if (node_count < 1) throw std::invalid_argument("DirectedGraph: node_count must be >= 1");
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= node_count || v >= node_count)
            throw std::invalid_argument("DirectedGraph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("DirectedGraph: self-loops are implicit, do not store them");
    }
}

Matrix averaging_matrix(const DirectedGraph& g) {
    g.validate();
    const int k = g.node_count;
    Matrix w(k, k);
    std::vector<std::vector<int>> in_neighbors(k);
    for (auto [u, v] : g.edges) in_neighbors[v].push_back(u);
    for (int i = 0; i < k; ++i) {
        const double weight = 1.0 / (1.0 + static_cast<double>(in_neighbors[i].size()));
        w(i, i) = weight;
        for (int u : in_neighbors[i]) w(i, u) += weight;
    }
    return w;
}

Matrix disagreement_basis(int node_count) {
    const int k = node_count;
    if (k < 2) throw std::invalid_argument("disagreement_basis: need at least 2 nodes");
    Matrix q(k - 1, k);
    for (int i = 1; i < k; ++i) {
        const double s = 1.0 / std::sqrt(static_cast<double>(i) * (i + 1.0));
        for (int j = 0; j < i; ++j) q(i - 1, j) = s;
        q(i - 1, i) = -static_cast<double>(i) * s;
    }
    return q;
}

SwitchedSystem consensus_system_with_basis(const std::vector<DirectedGraph>& graphs, const Matrix& q) {
    if (graphs.empty()) throw std::invalid_argument("consensus_system: empty graph list");
    const int k = graphs.front().node_count;
    for (const DirectedGraph& g : graphs)
        if (g.node_count != k) throw std::invalid_argument("consensus_system: graphs must share node_count");
    if (q.rows() != k - 1 || q.cols() != k)
        throw std::invalid_argument("consensus_system: basis must be (k-1) x k");
    SwitchedSystem sys;
    sys.dim = k - 1;
    const Matrix qt = transpose(q);
    for (const DirectedGraph& g : graphs) sys.modes.push_back((q * averaging_matrix(g)) * qt);
    return sys;
}

SwitchedSystem consensus_system(const std::vector<DirectedGraph>& graphs) {
    if (graphs.empty()) throw std::invalid_argument("consensus_system: empty graph list");
    return consensus_system_with_basis(graphs, disagreement_basis(graphs.front().node_count));
}

DirectedGraph graph_preset(const std::string& name) {
    // Six-node switching interaction networks; an edge (u, v) means v listens to u.
    if (name == "fig4-a") {
        return {6, {{3, 0}, {4, 1}, {0, 2}, {4, 2}, {4, 3}, {5, 3}, {5, 4}, {1, 5}, {2, 5}}};
    }
    if (name == "fig4-b") {
        return {6,
                {{2, 0}, {3, 0}, {5, 0}, {2, 1}, {4, 1}, {5, 1}, {1, 2}, {1, 3}, {5, 3}, {3, 4}, {5, 4}, {0, 5}}};
    }
    if (name == "fig4-c") {
        return {6,
                {{2, 0}, {3, 0}, {4, 0}, {5, 0}, {5, 1}, {5, 2}, {5, 3}, {0, 4}, {1, 4}, {3, 4}, {5, 4}, {0, 5}, {4, 5}}};
    }
    if (name == "complete6") {
        DirectedGraph g{6, {}};
        for (int u = 0; u < 6; ++u)
            for (int v = 0; v < 6; ++v)
                if (u != v) g.edges.emplace_back(u, v);
        return g;
    }
    throw std::invalid_argument("unknown graph preset: " + name);
}

std::vector<std::string> graph_preset_names() { return {"fig4-a", "fig4-b", "fig4-c", "complete6"}; }

void save_system_json(const SwitchedSystem& sys, const std::string& path, const std::string& meta_json) {
    sys.validate();
    nlohmann::json j;
    j["dim"] = sys.dim;
    j["modes"] = nlohmann::json::array();
    for (const Matrix& a : sys.modes) j["modes"].push_back(a.data());
    j["meta"] = nlohmann::json::parse(meta_json);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write system file: " + path);
    out << j.dump(2) << "\n";
}

SwitchedSystem load_system_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read system file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    SwitchedSystem sys;
    sys.dim = j.at("dim").get<int>();
    for (const auto& flat : j.at("modes")) {
        std::vector<double> entries = flat.get<std::vector<double>>();
        if (entries.size() != static_cast<size_t>(sys.dim) * sys.dim)
            throw std::runtime_error("system file: mode entry count does not match dim");
        Matrix a(sys.dim, sys.dim);
        a.data() = std::move(entries);
        sys.modes.push_back(std::move(a));
    }
    sys.validate();
    return sys;
}

}  // namespace jsrcert
