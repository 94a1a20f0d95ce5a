#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jsrcert {

using Vec = std::vector<double>;

/// Dense row-major real matrix. Small and value-semantic; everything in this
/// toolkit lives in dimension <= ~10.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n);
    static Matrix diag(const Vec& d);

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);
Matrix transpose(const Matrix& a);
Vec matvec(const Matrix& a, const Vec& x);
Matrix outer(const Vec& u, const Vec& v);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool bit_equal(const Matrix& a, const Matrix& b);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

/// Symmetric matrix. Construction rejects inputs whose asymmetry exceeds
/// 1e-12 * (1 + max|M|); use symmetrized() to average an almost-symmetric
/// product instead.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m);

    static SymMatrix identity(int n);
    static SymMatrix diag(const Vec& d);
    /// (M + M^T)/2, no symmetry check.
    static SymMatrix symmetrized(const Matrix& m);

    int dim() const { return m_.rows(); }
    double operator()(int i, int j) const { return m_(i, j); }
    const Matrix& mat() const { return m_; }

private:
    Matrix m_;
};

struct EigenPair {
    Vec values;      // ascending
    Matrix vectors;  // column i pairs with values[i]; orthonormal
};

/// Cyclic Jacobi eigendecomposition. Deterministic: fixed sweep order,
/// eigenvalues sorted ascending, eigenvector signs fixed by making the
/// largest-magnitude component positive.
EigenPair sym_eig(const SymMatrix& m);

/// Conditioning measure sqrt(det(P) / lambda_min(P)^n); >= 1 for SPD P.
double kappa(const SymMatrix& p);
double log_kappa(const SymMatrix& p);

/// S with S*P*S = I (the SPD inverse square root of P).
SymMatrix inv_sqrt(const SymMatrix& p);
SymMatrix spd_sqrt(const SymMatrix& p);
SymMatrix spd_inverse(const SymMatrix& p);

/// Nearest-symmetric projection followed by eigenvalue clipping into [lo, hi].
SymMatrix project_box(const Matrix& m, double lo, double hi);

std::string to_string(const Matrix& m);

}  // namespace jsrcert
