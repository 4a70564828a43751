#include "balanceflow/scale_symmetric.hpp"

#include "balanceflow/dissonance.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace balanceflow {

ScaleWitness::ScaleWitness(std::vector<double> gamma) : gamma_(std::move(gamma)) {
    if (gamma_.empty()) throw std::invalid_argument("scale witness must be nonempty");
    for (double g : gamma_)
        if (!(g > 0.0) || !std::isfinite(g))
            throw std::invalid_argument("scale witness entries must be positive and finite");
    const double head = gamma_.front();
    for (double& g : gamma_) g /= head;
}

AppraisalMatrix make_scale_symmetric(const AppraisalMatrix& x_s, const ScaleWitness& gamma) {
    if (x_s.n() != gamma.n()) throw std::invalid_argument("witness size must match the matrix");
    if (symmetry_defect(x_s.matrix()) > symmetry_tol)
        throw std::invalid_argument("base matrix must be symmetric");
    const int n = x_s.n();
    const auto& g = gamma.gamma();
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = std::sqrt(g[i] / g[j]) * x_s.matrix()(i, j);
    return AppraisalMatrix(std::move(out));
}

std::optional<ScaleWitness> find_witness(const AppraisalMatrix& x, double tol) {
    if (!(tol > 0.0) || !std::isfinite(tol))
        throw std::invalid_argument("tolerance must be positive and finite");
    const Matrix& a = x.matrix();
    const int n = x.n();

    // A sign-asymmetric edge would force a negative scale ratio.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const bool zij = a(i, j) == 0.0, zji = a(j, i) == 0.0;
            if (zij != zji) return std::nullopt;
            if (!zij && a(i, j) * a(j, i) <= 0.0) return std::nullopt;
        }

    // Ratio propagation over a BFS forest: gamma_j = gamma_i x_ji / x_ij.
    std::vector<double> gamma(n, 0.0);
    std::vector<bool> seen(n, false);
    for (int root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = true;
        gamma[root] = 1.0;
        std::queue<int> bfs;
        bfs.push(root);
        while (!bfs.empty()) {
            const int i = bfs.front();
            bfs.pop();
            for (int j = 0; j < n; ++j) {
                if (seen[j] || a(i, j) == 0.0) continue;
                seen[j] = true;
                gamma[j] = gamma[i] * a(j, i) / a(i, j);
                bfs.push(j);
            }
        }
    }

    // Non-tree edges must agree with the propagated scales.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (a(i, j) == 0.0) continue;
            const double lhs = a(i, j) * gamma[j];
            const double rhs = a(j, i) * gamma[i];
            if (std::abs(lhs - rhs) > tol * std::max(std::abs(lhs), std::abs(rhs)))
                return std::nullopt;
        }
    return ScaleWitness(std::move(gamma));
}

double check_trace_square(const AppraisalMatrix& x, double tol) {
    if (!find_witness(x, tol)) throw std::invalid_argument("matrix is not scale-symmetric");
    return (x.matrix() * x.matrix()).trace();
}

Matrix symmetrizing_similarity(const AppraisalMatrix& x, const ScaleWitness& gamma) {
    if (x.n() != gamma.n()) throw std::invalid_argument("witness size must match the matrix");
    const int n = x.n();
    const auto& g = gamma.gamma();
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = std::sqrt(g[j] / g[i]) * x.matrix()(i, j);
    return out;
}

}  // namespace balanceflow
