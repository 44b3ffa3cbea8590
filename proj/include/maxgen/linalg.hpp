#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "maxgen/error.hpp"

namespace maxgen {

using Vec = std::vector<double>;

// Dense row-major matrix. Sizes here are small (latent dims of a few tens,
// projection matrices of a few thousand rows), so no BLAS is involved.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Mat identity(std::size_t n, double scale = 1.0) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = scale;
        return m;
    }
};

inline Vec matvec(const Mat& a, const Vec& x) {
    if (x.size() != a.cols) {
        throw DimensionError("matvec: vector length " + std::to_string(x.size()) +
                             " does not match matrix columns " + std::to_string(a.cols));
    }
    Vec y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        const double* row = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Throws InternalError if a pivot is not strictly positive.
inline Mat cholesky(const Mat& a) {
    if (a.rows != a.cols) throw DimensionError("cholesky: matrix not square");
    const std::size_t n = a.rows;
    Mat l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (sum <= 0.0) {
                    throw InternalError("cholesky: matrix not positive definite");
                }
                l.at(i, i) = std::sqrt(sum);
            } else {
                l.at(i, j) = sum / l.at(j, j);
            }
        }
    }
    return l;
}

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
// Returned unsorted; callers min/max as needed.
inline Vec symmetric_eigenvalues(const Mat& a, int max_sweeps = 64) {
    if (a.rows != a.cols) throw DimensionError("symmetric_eigenvalues: matrix not square");
    const std::size_t n = a.rows;
    Mat m = a;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m.at(i, j) * m.at(i, j);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m.at(k, p);
                    const double mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m.at(p, k);
                    const double mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    Vec eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = m.at(i, i);
    return eig;
}

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace maxgen
