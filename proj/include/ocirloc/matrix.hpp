// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ocirloc {

/// Dense row-major matrix, just big enough for the shallow-network math.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }
};

/// Z = W X + b (column-broadcast bias). W: (r x k), X: (k x m).
inline Matrix affine_cols(const Matrix& w, const Matrix& x, const std::vector<double>& bias) {
    if (w.cols != x.rows || bias.size() != w.rows)
        throw std::invalid_argument("affine_cols: shape mismatch");
    Matrix z(w.rows, x.cols);
    for (std::size_t i = 0; i < w.rows; ++i) {
        double* zi = z.row(i);
        const double bi = bias[i];
        for (std::size_t j = 0; j < x.cols; ++j)
            zi[j] = bi;
        const double* wi = w.row(i);
        for (std::size_t k = 0; k < w.cols; ++k) {
            const double wik = wi[k];
            const double* xk = x.row(k);
            for (std::size_t j = 0; j < x.cols; ++j)
                zi[j] += wik * xk[j];
        }
    }
    return z;
}

/// A B^T for row-major A: (r x m), B: (c x m) -> (r x c).
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw std::invalid_argument("matmul_nt: shape mismatch");
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k)
                acc += ai[k] * bj[k];
            out(i, j) = acc;
        }
    }
    return out;
}

/// A^T B for A: (k x r), B: (k x m) -> (r x m).
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw std::invalid_argument("matmul_tn: shape mismatch");
    Matrix out(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = ak[i];
            double* oi = out.row(i);
            for (std::size_t j = 0; j < b.cols; ++j)
                oi[j] += aki * bk[j];
        }
    }
    return out;
}

} // namespace ocirloc
