#include "jsrcert/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace jsrcert {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const Vec& d) {
    const int n = static_cast<int>(d.size());
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = d[i];
    return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
    Matrix c = a;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("sub: shape mismatch");
    Matrix c = a;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

Matrix operator*(double c, const Matrix& a) {
    Matrix r = a;
    for (double& v : r.data()) v *= c;
    return r;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Vec matvec(const Matrix& a, const Vec& x) {
    if (a.cols() != static_cast<int>(x.size())) throw std::invalid_argument("apply: dimension mismatch");
    Vec y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Matrix outer(const Vec& u, const Vec& v) {
    Matrix m(static_cast<int>(u.size()), static_cast<int>(v.size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s = std::max(s, std::abs(v));
    return s;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.data() == b.data();
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("SymMatrix: not square");
    double asym = 0.0;
    int bi = 0, bj = 0;
    for (int i = 0; i < m_.rows(); ++i) {
        for (int j = i + 1; j < m_.cols(); ++j) {
            const double d = std::abs(m_(i, j) - m_(j, i));
            if (d > asym) {
                asym = d;
                bi = i;
                bj = j;
            }
        }
    }
    if (asym > 1e-12 * (1.0 + max_abs(m_))) {
        std::ostringstream os;
        os << "SymMatrix: asymmetry " << asym << " at (" << bi << "," << bj << ") exceeds tolerance";
        throw std::invalid_argument(os.str());
    }
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::identity(n)); }

SymMatrix SymMatrix::diag(const Vec& d) { return SymMatrix(Matrix::diag(d)); }

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("symmetrized: not square");
    Matrix s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    SymMatrix out;
    out.m_ = std::move(s);
    return out;
}

namespace {

double off_diag_norm(const Matrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

void fix_sign(Matrix& v, int col) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < v.rows(); ++i) {
        const double m = std::abs(v(i, col));
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (v(arg, col) < 0.0)
        for (int i = 0; i < v.rows(); ++i) v(i, col) = -v(i, col);
}

}  // namespace

EigenPair sym_eig(const SymMatrix& m) {
    const int n = m.dim();
    Matrix a = m.mat();
    Matrix v = Matrix::identity(n);
    const double scale = frobenius_norm(a);
    const double tol = 1e-13 * std::max(1.0, scale);

    const int max_sweeps = 64;
    int sweep = 0;
    while (off_diag_norm(a) > tol) {
        if (++sweep > max_sweeps) throw std::runtime_error("sym_eig: Jacobi did not converge");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

    EigenPair out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (int c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
        fix_sign(out.vectors, c);
    }
    return out;
}

namespace {

EigenPair require_spd(const SymMatrix& p, const char* who) {
    EigenPair e = sym_eig(p);
    if (e.values.empty() || e.values.front() <= 0.0) {
        std::ostringstream os;
        os << who << ": matrix is not positive definite (lambda_min = "
           << (e.values.empty() ? 0.0 : e.values.front()) << ")";
        throw std::invalid_argument(os.str());
    }
    return e;
}

SymMatrix rebuild(const EigenPair& e, const Vec& new_values) {
    const int n = static_cast<int>(new_values.size());
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += e.vectors(i, k) * new_values[k] * e.vectors(j, k);
            m(i, j) = s;
            m(j, i) = s;
        }
    }
    return SymMatrix::symmetrized(m);
}

}  // namespace

double log_kappa(const SymMatrix& p) {
    EigenPair e = require_spd(p, "kappa");
    const int n = p.dim();
    double log_det = 0.0;
    for (double lam : e.values) log_det += std::log(lam);
    return 0.5 * log_det - 0.5 * n * std::log(e.values.front());
}

double kappa(const SymMatrix& p) { return std::exp(log_kappa(p)); }

SymMatrix inv_sqrt(const SymMatrix& p) {
    EigenPair e = require_spd(p, "inv_sqrt");
    Vec w(e.values.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / std::sqrt(e.values[i]);
    return rebuild(e, w);
}

SymMatrix spd_sqrt(const SymMatrix& p) {
    EigenPair e = require_spd(p, "spd_sqrt");
    Vec w(e.values.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = std::sqrt(e.values[i]);
    return rebuild(e, w);
}

SymMatrix spd_inverse(const SymMatrix& p) {
    EigenPair e = require_spd(p, "spd_inverse");
    Vec w(e.values.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / e.values[i];
    return rebuild(e, w);
}

SymMatrix project_box(const Matrix& m, double lo, double hi) {
    if (!(0.0 < lo && lo <= hi)) throw std::invalid_argument("project_box: need 0 < lo <= hi");
    SymMatrix s = SymMatrix::symmetrized(m);
    EigenPair e = sym_eig(s);
    Vec w = e.values;
    for (double& lam : w) lam = std::clamp(lam, lo, hi);
    return rebuild(e, w);
}

std::string to_string(const Matrix& m) {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    for (int i = 0; i < m.rows(); ++i) {
        os << (i ? "; " : "");
        for (int j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    }
    os << "]";
    return os.str();
}

}  // namespace jsrcert
