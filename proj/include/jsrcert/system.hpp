#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jsrcert/matcore.hpp"
#include "jsrcert/rng.hpp"
#include "jsrcert/solver.hpp"

namespace jsrcert {

/// A discrete-time switched linear system: at every step one of the mode
/// matrices is applied to the state. Held only by generators and oracles;
/// the data-driven algorithms never look inside.
struct SwitchedSystem {
    int dim = 0;
    std::vector<Matrix> modes;

    int mode_count() const { return static_cast<int>(modes.size()); }
    void validate() const;
};

struct OracleConfig {
    Vec mode_probabilities;  // empty means uniform over the modes
    std::uint64_t rng_seed = 0;
};

/// Black-box one-step interface: set a state, observe the successor.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual Vec step(const Vec& x) = 0;
    virtual int dim() const = 0;
};

/// Stochastic oracle: each call independently draws a mode from the
/// configured probabilities. One stream per worker; never shared.
class OracleStream final : public Oracle {
public:
    OracleStream(SwitchedSystem sys, OracleConfig cfg);

    Vec step(const Vec& x) override;
    int dim() const override { return sys_.dim; }

    double min_mode_probability() const;

    void enable_mode_log() { log_modes_ = true; }
    const std::vector<int>& mode_log() const { return mode_log_; }
    const SwitchedSystem& system() const { return sys_; }
    const Rng& rng() const { return rng_; }

private:
    SwitchedSystem sys_;
    Vec cumulative_;
    Rng rng_;
    bool log_modes_ = false;
    std::vector<int> mode_log_;
};

/// Gelfand estimate ||A^(2^k)||_F^(1/2^k) via normalized repeated squaring.
double spectral_radius_estimate(const Matrix& a);

/// Largest P-weighted one-step growth over all modes and states:
/// max_A sigma_max(P^(1/2) A P^(-1/2)). Any value upper-bounds the JSR.
double contraction_rate(const SwitchedSystem& sys, const SymMatrix& p);

struct CqlfResult {
    double gamma = 0.0;
    SymMatrix p;
};

/// Model-based reference: smallest contraction rate certifiable with a
/// quadratic function P in {I <= P <= cone_hi I}, by bisection over gamma
/// with the shared feasibility engine. The returned gamma is recomputed from
/// the returned P, so it is always a true bound.
CqlfResult cqlf_bound(const SwitchedSystem& sys, double cone_hi, double tol,
                      const FeasOptions& feas = {});

/// Gaussian-entry modes rescaled so the model-based bound equals target_cqlf.
/// Rejects (measure-zero) draws whose modes look Barabanov, since those
/// degenerate the downstream confidence bound.
SwitchedSystem gen_random_stable(int dim, int mode_count, double target_cqlf, std::uint64_t seed,
                                 double cone_hi = 100.0, double tol = 1e-5);

struct DirectedGraph {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;  // (source, target): target listens to source
    void validate() const;
};

/// Row-stochastic equal-weight averaging of each node with its in-neighbors.
Matrix averaging_matrix(const DirectedGraph& g);

/// Orthonormal basis (rows) of the subspace orthogonal to the all-ones
/// vector; (k-1) x k. Helmert construction.
Matrix disagreement_basis(int node_count);

/// Consensus dynamics projected to the disagreement space: one mode
/// Q W Q^T per interaction graph, state dimension node_count - 1.
SwitchedSystem consensus_system(const std::vector<DirectedGraph>& graphs);
SwitchedSystem consensus_system_with_basis(const std::vector<DirectedGraph>& graphs, const Matrix& q);

/// Built-in interaction networks: "fig4-a", "fig4-b", "fig4-c", "complete6".
DirectedGraph graph_preset(const std::string& name);
std::vector<std::string> graph_preset_names();

void save_system_json(const SwitchedSystem& sys, const std::string& path,
                      const std::string& meta_json = "{}");
SwitchedSystem load_system_json(const std::string& path);

}  // namespace jsrcert
