#pragma once

// Small dense matrix helpers for the low-dimensional (n <= ~20 assets)
// problems this library works with. Row-major storage, no expression
// templates; everything here is O(n^3) at worst on tiny n.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace esglab {

struct Matrix {
    std::size_t rows{0};
    std::size_t cols{0};
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool square() const { return rows == cols; }
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline double max_symmetry_error(const Matrix& a) {
    double err = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j)
            err = std::max(err, std::abs(a(i, j) - a(j, i)));
    return err;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

// Lower-triangular Cholesky factor of a symmetric positive semidefinite
// matrix. Zero (or numerically zero) pivots are allowed: the corresponding
// column of L is zeroed, which handles perfectly correlated assets. A pivot
// below -tol, or a nonzero entry under a zero pivot, is an error.
inline Matrix cholesky_psd(const Matrix& a, double tol = 1e-10) {
    if (!a.square()) throw std::invalid_argument("cholesky_psd: matrix not square");
    const std::size_t n = a.rows;
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < j; ++k) sum += l(j, k) * l(j, k);
        const double pivot = a(j, j) - sum;
        if (pivot < -tol) throw std::runtime_error("cholesky_psd: matrix not positive semidefinite");
        if (pivot <= tol) {
            l(j, j) = 0.0;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < j; ++k) s += l(i, k) * l(j, k);
                if (std::abs(a(i, j) - s) > std::sqrt(tol))
                    throw std::runtime_error("cholesky_psd: inconsistent semidefinite matrix");
                l(i, j) = 0.0;
            }
        } else {
            l(j, j) = std::sqrt(pivot);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < j; ++k) s += l(i, k) * l(j, k);
                l(i, j) = (a(i, j) - s) / l(j, j);
            }
        }
    }
    return l;
}

// Strict variant: every pivot must be positive. Used where a singular
// factor would silently lose information (e.g. whitening sample data).
inline Matrix cholesky_strict(const Matrix& a, double tol = 1e-12) {
    if (!a.square()) throw std::invalid_argument("cholesky_strict: matrix not square");
    const std::size_t n = a.rows;
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < j; ++k) sum += l(j, k) * l(j, k);
        const double pivot = a(j, j) - sum;
        if (pivot <= tol) throw std::runtime_error("cholesky_strict: matrix singular or indefinite");
        l(j, j) = std::sqrt(pivot);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < j; ++k) s += l(i, k) * l(j, k);
            l(i, j) = (a(i, j) - s) / l(j, j);
        }
    }
    return l;
}

// Solves L x = b for lower-triangular L (zero diagonal entries demand a
// zero right-hand side as in cholesky_psd output).
inline std::vector<double> forward_solve(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows;
    if (b.size() != n) throw std::invalid_argument("forward_solve: dimension mismatch");
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        if (l(i, i) == 0.0) {
            x[i] = 0.0;
        } else {
            x[i] = s / l(i, i);
        }
    }
    return x;
}

struct EigenDecomposition {
    std::vector<double> values;  // descending
    Matrix vectors;              // column k = eigenvector of values[k]
};

// Cyclic Jacobi eigensolver for symmetric matrices. Deterministic: fixed
// sweep order, eigenpairs sorted by descending eigenvalue, and each
// eigenvector's sign fixed so its largest-magnitude entry is positive
// (first such entry on exact ties).
inline EigenDecomposition eigen_symmetric(const Matrix& a_in, std::size_t max_sweeps = 64) {
    if (!a_in.square()) throw std::invalid_argument("eigen_symmetric: matrix not square");
    const std::size_t n = a_in.rows;
    Matrix a = a_in;
    // work on the symmetrized matrix so tiny asymmetries cannot leak in
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = m;
            a(j, i) = m;
        }
    Matrix v = Matrix::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    for (std::size_t sweep = 0; sweep < max_sweeps && off_norm() > 1e-14; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (a(order[j], order[j]) > a(order[i], order[i])) std::swap(order[i], order[j]);

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v(i, src)) > best) {
                best = std::abs(v(i, src));
                arg = i;
            }
        }
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
    }
    return out;
}

}  // namespace esglab
