#pragma once

#include <string>
#include <vector>

#include "jsrcert/kernels.hpp"
#include "jsrcert/matcore.hpp"
#include "jsrcert/rng.hpp"
#include "jsrcert/system.hpp"

namespace jsrcert {

/// Positive definite change-of-basis matrix. Construction checks positive
/// definiteness; membership in the optimization box [lo, hi] is a separate
/// query since the sample-reusing iteration deliberately drifts outside it.
class BasisTransform {
public:
    explicit BasisTransform(SymMatrix b, double lo = 1.0, double hi = 100.0);
    static BasisTransform identity(int n, double hi = 100.0);

    const SymMatrix& b() const { return b_; }
    const Matrix& inverse() const { return b_inv_; }
    int dim() const { return b_.dim(); }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool is_identity() const { return identity_; }
    bool in_box(double tol = 1e-10) const;

    /// Stable identifier of the matrix contents ("I" for the identity).
    const std::string& tag() const { return tag_; }

private:
    SymMatrix b_;
    Matrix b_inv_;
    Vec eigenvalues_;
    double lo_, hi_;
    bool identity_;
    std::string tag_;
};

struct Dataset {
    std::vector<OneStepSample> samples;
    std::string basis_tag;
    std::string seed_trace;
    bool mixed_basis = false;

    std::size_t size() const { return samples.size(); }
    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().x.size()); }

    /// Appending under a different basis marks the set heuristic-only.
    void append(OneStepSample s, const std::string& tag);
    void validate() const;
};

std::vector<Vec> sample_gaussian(int dim, int count, Rng& rng);

struct CollectResult {
    Dataset original;     // (x, B^-1 y') pairs: one-step data of the similar system
    Dataset transformed;  // (B x, y') pairs as seen by the oracle
};

/// One pass of the change-of-basis pipeline: draw standard Gaussians, push
/// through B, query the oracle, pull back through B^-1. Both pairings share
/// indices.
CollectResult collect(Oracle& oracle, const BasisTransform& basis, int count, Rng& rng);

/// CSV with header i,x_1..x_n,y_1..y_n plus a JSON sidecar (<path>.json)
/// holding basis tag, B entries and RNG provenance.
void save_dataset_csv(const Dataset& data, const std::string& path, const Matrix* basis = nullptr);
Dataset load_dataset_csv(const std::string& path);

}  // namespace jsrcert
