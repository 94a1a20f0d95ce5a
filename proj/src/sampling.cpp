#include "jsrcert/sampling.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace jsrcert {

namespace {

std::string basis_hash_tag(const Matrix& b) {
    // FNV-1a over the raw double bits; enough to tell bases apart in logs.
    std::uint64_t h = 1469598103934665603ull;
    for (double v : b.data()) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFFu;
            h *= 1099511628211ull;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "spd:%016" PRIx64, h);
    return buf;
}

}  // namespace

BasisTransform::BasisTransform(SymMatrix b, double lo, double hi) : b_(std::move(b)), lo_(lo), hi_(hi) {
    EigenPair e = sym_eig(b_);
    if (e.values.front() <= 0.0)
        throw std::invalid_argument("BasisTransform: matrix is not positive definite");
    eigenvalues_ = e.values;
    const int n = b_.dim();
    b_inv_ = Matrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += e.vectors(i, k) * e.vectors(j, k) / e.values[k];
            b_inv_(i, j) = b_inv_(j, i) = s;
        }
    identity_ = true;
    for (int i = 0; i < n && identity_; ++i)
        for (int j = 0; j < n; ++j)
            if (b_(i, j) != (i == j ? 1.0 : 0.0)) {
                identity_ = false;
                break;
            }
    tag_ = identity_ ? "I" : basis_hash_tag(b_.mat());
}

BasisTransform BasisTransform::identity(int n, double hi) {
    return BasisTransform(SymMatrix::identity(n), 1.0, hi);
}

bool BasisTransform::in_box(double tol) const {
    return eigenvalues_.front() >= lo_ - tol && eigenvalues_.back() <= hi_ + tol;
}

void Dataset::append(OneStepSample s, const std::string& tag) {
    if (!samples.empty() && static_cast<int>(s.x.size()) != dim())
        throw std::invalid_argument("Dataset::append: dimension mismatch");
    if (norm2(s.x) == 0.0) throw std::invalid_argument("Dataset::append: zero initial state");
    if (samples.empty() && basis_tag.empty()) basis_tag = tag;
    if (tag != basis_tag && !mixed_basis) {
        mixed_basis = true;
        basis_tag = "mixed";
    }
    samples.push_back(std::move(s));
}

void Dataset::validate() const {
    const int n = dim();
    for (const OneStepSample& s : samples) {
        if (static_cast<int>(s.x.size()) != n || static_cast<int>(s.y.size()) != n)
            throw std::invalid_argument("Dataset: inconsistent sample dimensions");
        if (norm2(s.x) == 0.0) throw std::invalid_argument("Dataset: zero initial state");
    }
}

std::vector<Vec> sample_gaussian(int dim, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("sample_gaussian: count must be >= 1");
    std::vector<Vec> out;
    out.reserve(count);
    for (int c = 0; c < count; ++c) {
        Vec x(dim);
        bool nonzero = false;
        do {
            for (int i = 0; i < dim; ++i) {
                x[i] = rng.gaussian();
                nonzero = nonzero || x[i] != 0.0;
            }
        } while (!nonzero);  // probability-zero draw, rejected defensively
        out.push_back(std::move(x));
    }
    return out;
}

CollectResult collect(Oracle& oracle, const BasisTransform& basis, int count, Rng& rng) {
    if (oracle.dim() != basis.dim())
        throw std::invalid_argument("collect: basis dimension does not match oracle");
    CollectResult res;
    res.original.basis_tag = basis.tag();
    res.transformed.basis_tag = basis.tag();
    res.original.seed_trace = rng.trace();
    res.transformed.seed_trace = res.original.seed_trace;
    res.original.samples.reserve(count);
    res.transformed.samples.reserve(count);
    for (const Vec& x : sample_gaussian(basis.dim(), count, rng)) {
        Vec x_prime = matvec(basis.b().mat(), x);
        Vec y_prime = oracle.step(x_prime);
        Vec y = matvec(basis.inverse(), y_prime);
        res.original.samples.push_back({x, std::move(y)});
        res.transformed.samples.push_back({std::move(x_prime), std::move(y_prime)});
    }
    return res;
}

void save_dataset_csv(const Dataset& data, const std::string& path, const Matrix* basis) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset: " + path);
    const int n = data.dim();
    out << "i";
    for (int j = 1; j <= n; ++j) out << ",x_" << j;
    for (int j = 1; j <= n; ++j) out << ",y_" << j;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        out << i;
        for (double v : data.samples[i].x) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        for (double v : data.samples[i].y) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }

    nlohmann::json side;
    side["basis_tag"] = data.basis_tag;
    side["seed_trace"] = data.seed_trace;
    side["mixed_basis"] = data.mixed_basis;
    side["dim"] = n;
    if (basis) side["B"] = basis->data();
    std::ofstream sout(path + ".json");
    if (!sout) throw std::runtime_error("cannot write dataset sidecar: " + path + ".json");
    sout << side.dump(2) << "\n";
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read dataset: " + path);
    Dataset data;

    std::ifstream sin(path + ".json");
    if (sin) {
        nlohmann::json side = nlohmann::json::parse(sin);
        data.basis_tag = side.value("basis_tag", "");
        data.seed_trace = side.value("seed_trace", "");
        data.mixed_basis = side.value("mixed_basis", false);
    }

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset is empty: " + path);
    int columns = 1;
    for (char c : line) columns += c == ',';
    if (columns < 3 || (columns - 1) % 2 != 0)
        throw std::runtime_error("dataset header is malformed: " + path);
    const int n = (columns - 1) / 2;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // index column
        OneStepSample s;
        s.x.resize(n);
        s.y.resize(n);
        for (int j = 0; j < 2 * n; ++j) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("dataset row is short: " + path);
            double v = std::stod(cell);
            (j < n ? s.x[j] : s.y[j - n]) = v;
        }
        data.samples.push_back(std::move(s));
    }
    data.validate();
    return data;
}

}  // namespace jsrcert
