#include "balanceflow/equilibria.hpp"

#include "balanceflow/dissonance.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace balanceflow {

NstResiduals is_nst(const Matrix& v, double tol) {
    const auto n = v.rows();
    const auto k = v.cols();
    NstResiduals r{false, 0.0, 0.0};
    if (n < 1 || k < 1 || k > n) return r;
    r.orthogonality = (v.transpose() * v - Matrix::Identity(k, k)).norm();
    const double target = double(k) / double(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r.row_norm = std::max(r.row_norm, std::abs(v.row(i).squaredNorm() - target));
    }
    r.ok = r.orthogonality < tol && r.row_norm < tol;
    return r;
}

NstMatrix::NstMatrix(int n, int k, Matrix v) : n_(n), k_(k), v_(std::move(v)) {
    if (v_.rows() != n_ || v_.cols() != k_) {
        throw std::invalid_argument("NstMatrix: frame shape disagrees with (n, k)");
    }
    const NstResiduals r = is_nst(v_);
    if (!r.ok) {
        throw std::invalid_argument(
            "NstMatrix: frame violates the normalized-Stiefel conditions (orthogonality residual " +
            std::to_string(r.orthogonality) + ", row-norm residual " + std::to_string(r.row_norm) + ")");
    }
}

NstMatrix nst_k1(int n, const std::vector<int>& s) {
    if (static_cast<int>(s.size()) != n || n < 1) {
        throw std::invalid_argument("nst_k1: sign vector must have length n");
    }
    Matrix v(n, 1);
    for (int i = 0; i < n; ++i) {
        if (s[i] != 1 && s[i] != -1) throw std::invalid_argument("nst_k1: sign entries must be +1 or -1");
        v(i, 0) = s[i] / std::sqrt(double(n));
    }
    return NstMatrix(n, 1, std::move(v));
}

NstMatrix nst_k2(int n, const std::vector<double>& angles) {
    if (static_cast<int>(angles.size()) != n || n < 2) {
        throw std::invalid_argument("nst_k2: need n >= 2 angles");
    }
    double sc = 0.0, ss = 0.0;
    for (double a : angles) {
        sc += std::cos(2.0 * a);
        ss += std::sin(2.0 * a);
    }
    if (std::abs(sc) > 1e-9 || std::abs(ss) > 1e-9) {
        throw std::invalid_argument("nst_k2: angles violate the closed-polygon constraint sum exp(2ia) = 0 (residual " +
                                    std::to_string(std::hypot(sc, ss)) + ")");
    }
    Matrix v(n, 2);
    const double scale = std::sqrt(2.0 / n);
    for (int m = 0; m < n; ++m) {
        v(m, 0) = scale * std::cos(angles[m]);
        v(m, 1) = scale * std::sin(angles[m]);
    }
    return NstMatrix(n, 2, std::move(v));
}

std::vector<double> regular_ngon_angles(int n) {
    std::vector<double> a(n);
    for (int m = 0; m < n; ++m) a[m] = std::numbers::pi * m / n;
    return a;
}

NstMatrix nst_stacked(const Matrix& u1, const Matrix& u2) {
    const auto k = u1.rows();
    if (u1.cols() != k || u2.rows() != k || u2.cols() != k) {
        throw std::invalid_argument("nst_stacked: blocks must be square of equal size");
    }
    for (const Matrix* u : {&u1, &u2}) {
        if ((u->transpose() * *u - Matrix::Identity(k, k)).norm() > 1e-10) {
            throw std::invalid_argument("nst_stacked: blocks must be orthogonal");
        }
    }
    Matrix v(2 * k, k);
    v.topRows(k) = u1 / std::numbers::sqrt2;
    v.bottomRows(k) = u2 / std::numbers::sqrt2;
    return NstMatrix(static_cast<int>(2 * k), static_cast<int>(k), std::move(v));
}

NstMatrix nst_harmonic(int n, int k) {
    if (k < 1 || k > n) throw std::invalid_argument("nst_harmonic: need 1 <= k <= n");
    if (k == n) return NstMatrix(n, k, Matrix::Identity(n, n));
    Matrix v(n, k);
    int col = 0;
    if (k % 2 == 1) {
        v.col(col++).setConstant(1.0 / std::sqrt(double(n)));
    }
    const double scale = std::sqrt(2.0 / n);
    for (int j = 1; col < k; ++j) {
        // Frequencies stay below n/2, keeping the sine column nonzero and
        // all 2k column frequencies distinct mod n.
        for (int m = 0; m < n; ++m) {
            const double theta = 2.0 * std::numbers::pi * j * m / n;
            v(m, col) = scale * std::cos(theta);
            v(m, col + 1) = scale * std::sin(theta);
        }
        col += 2;
    }
    return NstMatrix(n, k, std::move(v));
}

SphereAppraisal build_irreducible(int n, int k, const NstMatrix& v) {
    if (k < 1 || k >= n) throw std::invalid_argument("build_irreducible: need 1 <= k < n");
    if (v.n() != n || v.k() != k) throw std::invalid_argument("build_irreducible: frame shape disagrees with (n, k)");
    const double p = std::sqrt(double(n) / (double(k) * (n - k)));
    const double q = std::sqrt(double(k) / (double(n) * (n - k)));
    Matrix z = p * (v.v() * v.v().transpose()) - q * Matrix::Identity(n, n);
    z.diagonal().setZero();  // p k/n = q makes the diagonal analytically zero
    SphereAppraisal out{AppraisalMatrix(std::move(z))};
    if (residual(out) >= 1e-9) {
        throw std::logic_error("build_irreducible: constructed state fails the equilibrium residual check");
    }
    return out;
}

double equilibrium_dissonance(int n, int k) {
    if (k < 1 || k >= n) throw std::invalid_argument("equilibrium_dissonance: need 1 <= k < n");
    return -(n - 2.0 * k) / std::sqrt(double(k) * n * (n - k));
}

double residual(const SphereAppraisal& z) {
    const Matrix& zm = z.matrix();
    const double d = symmetry_defect(zm) <= symmetry_tol ? dissonance(zm) : dissonance_asym(zm);
    Matrix r = zm * zm + d * zm;
    r.diagonal().setZero();  // subtracts diag(Z^2); D(Z) Z has zero diagonal
    return r.norm();
}

Matrix EquilibriumSpec::assemble() const {
    int total = 0;
    for (const auto& b : blocks) total += b.n;
    if (static_cast<int>(permutation.size()) != total) {
        throw std::invalid_argument("EquilibriumSpec: permutation length disagrees with total size");
    }
    Matrix block = Matrix::Zero(total, total);
    int off = 0;
    for (const auto& b : blocks) {
        if (b.v) {
            block.block(off, off, b.n, b.n) =
                b.p * (b.v->v() * b.v->v().transpose()) - b.q * Matrix::Identity(b.n, b.n);
        }
        off += b.n;
    }
    block.diagonal().setZero();  // p_i k_i = q_i n_i makes every block diagonal analytically zero
    Matrix out = Matrix::Zero(total, total);
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j) out(permutation[i], permutation[j]) = block(i, j);
    return out;
}

std::pair<EquilibriumSpec, SphereAppraisal> build_reducible(
    const std::vector<BlockInput>& blocks,
    std::optional<int> epsilon_hint,
    const std::vector<double>& betas) {
    if (blocks.empty()) throw std::invalid_argument("build_reducible: need at least one block");

    int epsilon = 0;
    bool have_nonzero = false;
    int nonzero_total = 0;
    for (const auto& b : blocks) {
        if (b.n < 1) throw std::invalid_argument("build_reducible: block sizes must be positive");
        if (!b.v) continue;
        if (b.k < 1 || b.k >= b.n) throw std::invalid_argument("build_reducible: nonzero blocks need 1 <= k < n");
        if (b.v->n() != b.n || b.v->k() != b.k) {
            throw std::invalid_argument("build_reducible: frame shape disagrees with its block");
        }
        const int sgn = (b.n > 2 * b.k) - (b.n < 2 * b.k);
        if (!have_nonzero) {
            epsilon = sgn;
            have_nonzero = true;
        } else if (sgn != epsilon) {
            throw std::invalid_argument("build_reducible: nonzero blocks must share sign(n_i - 2 k_i)");
        }
        nonzero_total += b.n;
    }
    if (!have_nonzero) throw std::invalid_argument("build_reducible: all blocks are zero; no unit-norm equilibrium");
    if (epsilon_hint && *epsilon_hint != epsilon) {
        throw std::invalid_argument("build_reducible: epsilon hint disagrees with sign(n_i - 2 k_i)");
    }

    double alpha = 0.0;
    std::vector<double> beta(blocks.size(), 0.0);
    if (epsilon != 0) {
        if (!betas.empty()) {
            throw std::invalid_argument("build_reducible: betas are determined by the blocks when epsilon != 0");
        }
        double coupling = 0.0;
        for (const auto& b : blocks) {
            if (!b.v) continue;
            const double d = double(b.n) - 2.0 * b.k;
            coupling += 4.0 * b.k * b.n * (b.n - b.k) / (d * d);
        }
        alpha = epsilon / std::sqrt(coupling);
        for (size_t i = 0; i < blocks.size(); ++i) {
            const auto& b = blocks[i];
            if (!b.v) continue;
            const double d = double(b.n) - 2.0 * b.k;
            beta[i] = alpha * alpha * 4.0 * b.k * (b.n - b.k) / (d * d);
        }
    } else {
        size_t bi = 0;
        double weighted = 0.0;
        for (size_t i = 0; i < blocks.size(); ++i) {
            if (!blocks[i].v) continue;
            double value = betas.empty() ? 1.0 / nonzero_total : (bi < betas.size() ? betas[bi] : -1.0);
            ++bi;
            if (value <= 0.0) throw std::invalid_argument("build_reducible: epsilon = 0 betas must be positive and one per nonzero block");
            beta[i] = value;
            weighted += value * blocks[i].n;
        }
        if (!betas.empty() && bi != betas.size()) {
            throw std::invalid_argument("build_reducible: expected one beta per nonzero block");
        }
        if (std::abs(weighted - 1.0) > 1e-10) {
            throw std::invalid_argument("build_reducible: epsilon = 0 betas must satisfy sum beta_i n_i = 1");
        }
    }

    EquilibriumSpec spec;
    spec.epsilon = epsilon;
    spec.alpha = alpha;
    int total = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        EquilibriumBlock eb;
        eb.n = blocks[i].n;
        eb.k = blocks[i].v ? blocks[i].k : 0;
        eb.v = blocks[i].v;
        eb.beta = beta[i];
        if (blocks[i].v) {
            const double w = std::sqrt(alpha * alpha + beta[i]);
            eb.p = 2.0 * w;
            eb.q = w - alpha;
        }
        spec.blocks.push_back(std::move(eb));
        total += blocks[i].n;
    }
    spec.permutation.resize(total);
    for (int i = 0; i < total; ++i) spec.permutation[i] = i;

    SphereAppraisal z{AppraisalMatrix(spec.assemble())};
    if (residual(z) >= 1e-9) {
        throw std::logic_error("build_reducible: assembled state fails the equilibrium residual check");
    }
    return {std::move(spec), std::move(z)};
}

nlohmann::json spec_to_json(const EquilibriumSpec& spec) {
    nlohmann::json j;
    j["epsilon"] = spec.epsilon;
    j["alpha"] = spec.alpha;
    auto& blocks = j["blocks"] = nlohmann::json::array();
    for (const auto& b : spec.blocks) {
        nlohmann::json bj;
        bj["n"] = b.n;
        bj["k"] = b.k;
        bj["p"] = b.p;
        bj["q"] = b.q;
        bj["beta"] = b.beta;
        if (b.v) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index r = 0; r < b.v->v().rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index c = 0; c < b.v->v().cols(); ++c) row.push_back(b.v->v()(r, c));
                rows.push_back(std::move(row));
            }
            bj["V"] = std::move(rows);
        } else {
            bj["V"] = nullptr;
        }
        blocks.push_back(std::move(bj));
    }
    auto& perm = j["permutation"] = nlohmann::json::array();
    for (int p : spec.permutation) perm.push_back(p + 1);
    return j;
}

BalancedFamily::BalancedFamily(int n1, int n) : n1_(n1), n_(n) {
    if (n1 < 2 || n1 > n) throw std::invalid_argument("enumerate_balanced: need 2 <= n1 <= n");
    if (n1 > 62) throw std::invalid_argument("enumerate_balanced: family size 2^(n1-1) overflows enumeration");
}

std::vector<int> BalancedFamily::sign_vector(std::uint64_t index) const {
    if (index >= size()) throw std::out_of_range("enumerate_balanced: index out of range");
    std::vector<int> s(n1_, 1);
    for (int j = 1; j < n1_; ++j) {
        if ((index >> (j - 1)) & 1u) s[j] = -1;
    }
    return s;
}

SphereAppraisal BalancedFamily::operator[](std::uint64_t index) const {
    const std::vector<int> s = sign_vector(index);
    Matrix z = Matrix::Zero(n_, n_);
    const double scale = 1.0 / std::sqrt(double(n1_) * (n1_ - 1));
    for (int i = 0; i < n1_; ++i)
        for (int j = 0; j < n1_; ++j)
            if (i != j) z(i, j) = scale * s[i] * s[j];
    return SphereAppraisal(AppraisalMatrix(std::move(z)));
}

double instability_certificate(const SphereAppraisal& z_star) {
    if (residual(z_star) >= 1e-6) {
        throw std::invalid_argument("instability_certificate: input is not an equilibrium (residual >= 1e-6)");
    }
    const Matrix& zm = z_star.matrix();
    const double d = symmetry_defect(zm) <= symmetry_tol ? dissonance(zm) : dissonance_asym(zm);
    const double n = static_cast<double>(z_star.n());
    return (n * n - n + 3.0) * d;
}

}  // namespace balanceflow
