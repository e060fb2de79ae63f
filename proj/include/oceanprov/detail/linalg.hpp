#ifndef OCEANPROV_DETAIL_LINALG_HPP
#define OCEANPROV_DETAIL_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "../matrix.hpp"

namespace oceanprov::detail {

struct EigenDecomposition {
    std::vector<double> values;  // descending
    Matrix vectors;              // column j is the eigenvector of values[j]
};

// Cyclic Jacobi eigendecomposition of a small symmetric matrix. The sweep
// order is fixed, so results are bit-reproducible for identical input.
inline EigenDecomposition jacobi_eigen_symmetric(Matrix a, int max_sweeps = 64) {
    const std::size_t n = a.rows();
    Matrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-30) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
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
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

struct Svd {
    Matrix u;                    // n x n
    std::vector<double> sigma;   // descending, >= 0
    Matrix v;                    // n x n, A = U * diag(sigma) * V^T
};

// One-sided Jacobi SVD for small square matrices (registration uses 2x2/3x3).
inline Svd svd_small(Matrix a, int max_sweeps = 64) {
    const std::size_t n = a.rows();
    Matrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    alpha += a(k, p) * a(k, p);
                    beta += a(k, q) * a(k, q);
                    gamma += a(k, p) * a(k, q);
                }
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) + 1e-300) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        if (!rotated) break;
    }

    Svd out;
    out.sigma.resize(n);
    out.u = Matrix(n, n, 0.0);
    out.v = Matrix(n, n, 0.0);

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = norms[src];
        for (std::size_t i = 0; i < n; ++i) {
            // Columns with ~zero norm get an arbitrary but fixed basis vector;
            // callers reject rank-deficient inputs where it would matter.
            out.u(i, j) = norms[src] > 1e-300 ? a(i, src) / norms[src] : (i == j ? 1.0 : 0.0);
            out.v(i, j) = v(i, src);
        }
    }
    return out;
}

inline double determinant(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (n == 3) {
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    }
    // Gaussian elimination with partial pivoting for larger sizes.
    Matrix a = m;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        if (std::abs(a(pivot, col)) < 1e-300) return 0.0;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
        }
    }
    return det;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

}

#endif
