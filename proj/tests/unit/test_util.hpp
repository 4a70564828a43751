#pragma once

#include "balanceflow/matrix.hpp"

#include <random>

namespace testutil {

using balanceflow::Matrix;

inline Matrix random_matrix(int n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = u(rng);
    return m;
}

inline Matrix random_zero_diag(int n, std::mt19937_64& rng) {
    Matrix m = random_matrix(n, rng);
    m.diagonal().setZero();
    return m;
}

inline Matrix random_symmetric_zero_diag(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

inline Matrix random_sym_unit(int n, std::mt19937_64& rng) {
    Matrix m = random_symmetric_zero_diag(n, rng);
    return m / m.norm();
}

inline Matrix random_unit_zero_diag(int n, std::mt19937_64& rng) {
    Matrix m = random_zero_diag(n, rng);
    return m / m.norm();
}

/// Random orthogonal k x k factor (QR of a random matrix, sign-fixed).
inline Matrix random_orthogonal(int k, std::mt19937_64& rng) {
    Matrix a = random_matrix(k, rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(k, k);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < k; ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
}

/// Triad triple-loop oracle for the energy: -sum over ordered index triples
/// with pairwise-distinct entries of x_ij x_jk x_ki. Equals -trace(X^3) on
/// zero-diagonal matrices.
inline double triad_oracle(const Matrix& x) {
    const int n = static_cast<int>(x.rows());
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            for (int k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                acc += x(i, j) * x(j, k) * x(k, i);
            }
        }
    return -acc;
}

}  // namespace testutil
