#pragma once

#include "balanceflow/matrix.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace balanceflow {

/// n x k frame with orthonormal columns and equal row norms sqrt(k/n).
/// These frames parameterize every symmetric equilibrium of the projected
/// flow. Construction validates both conditions to 1e-10.
class NstMatrix {
public:
    NstMatrix(int n, int k, Matrix v);

    int n() const { return n_; }
    int k() const { return k_; }
    const Matrix& v() const { return v_; }

private:
    int n_;
    int k_;
    Matrix v_;
};

struct NstResiduals {
    bool ok;
    double orthogonality;  // ||V^T V - I||_F
    double row_norm;       // max | ||row||^2 - k/n |
};

NstResiduals is_nst(const Matrix& v, double tol = 1e-10);

/// k = 1 frame: column s/sqrt(n), s in {-1,+1}^n.
NstMatrix nst_k1(int n, const std::vector<int>& s);

/// k = 2 frame: rows sqrt(2/n) (cos a_m, sin a_m). The angles must satisfy
/// the closed-polygon constraint sum_m exp(2 i a_m) = 0 within 1e-9; the
/// regular n-gon a_m = pi (m-1)/n satisfies it for every n >= 3.
NstMatrix nst_k2(int n, const std::vector<double>& angles);

std::vector<double> regular_ngon_angles(int n);

/// n = 2k frame (1/sqrt(2)) [U1; U2] from two k x k orthogonal blocks.
NstMatrix nst_stacked(const Matrix& u1, const Matrix& u2);

/// Deterministic frame for arbitrary 1 <= k <= n: columns drawn from the
/// real Fourier basis (constant column for odd k, cos/sin pairs at distinct
/// frequencies), which have orthonormal columns and exactly equal row norms.
/// Reduces to the all-plus k=1 vector and the regular n-gon at k=2.
NstMatrix nst_harmonic(int n, int k);

/// Irreducible equilibrium Z* = p V V^T - q I with p = sqrt(n/(k(n-k))),
/// q = sqrt(k/(n(n-k))); unit norm, zero diagonal, spectrum
/// {p-q (x k), -q (x (n-k))}. Requires 1 <= k < n.
SphereAppraisal build_irreducible(int n, int k, const NstMatrix& v);

/// Closed-form energy at the irreducible equilibrium:
/// -(n-2k)/sqrt(k n (n-k)), strictly increasing in k.
double equilibrium_dissonance(int n, int k);

/// ||Z^2 + D(Z) Z - diag(Z^2)||_F; equilibria satisfy < 1e-9. Uses the
/// plain energy when z is symmetric within 1e-10, the asymmetric energy
/// otherwise.
double residual(const SphereAppraisal& z);

/// One diagonal block of a reducible equilibrium. A nullopt frame denotes
/// an explicit zero block (excluded from the scaling and norm budgets).
struct BlockInput {
    int n;
    int k = 0;
    std::optional<NstMatrix> v;  // nullopt: zero block
};

struct EquilibriumBlock {
    int n = 0;
    int k = 0;
    std::optional<NstMatrix> v;
    double p = 0.0;
    double q = 0.0;
    double beta = 0.0;
};

/// Block-diagonal equilibrium description: Z* = blockdiag(p_i V_i V_i^T - q_i I)
/// under the given node permutation, with the shared sign epsilon and scale
/// alpha of the block-coupling equations.
struct EquilibriumSpec {
    std::vector<int> permutation;  // identity unless a caller reorders nodes
    std::vector<EquilibriumBlock> blocks;
    int epsilon = 0;
    double alpha = 0.0;

    Matrix assemble() const;
};

nlohmann::json spec_to_json(const EquilibriumSpec& spec);

/// Reducible builder. Nonzero blocks must share epsilon = sign(n_i - 2 k_i);
/// for epsilon != 0 the scales alpha, beta_i are determined by the blocks,
/// for epsilon = 0 the betas must satisfy sum beta_i n_i = 1 (supplied via
/// `betas` or defaulted to the uniform choice 1/sum n_i over nonzero
/// blocks). epsilon_hint, when nonzero-sized, is validated against the
/// computed sign. A single-block call reproduces build_irreducible.
std::pair<EquilibriumSpec, SphereAppraisal> build_reducible(
    const std::vector<BlockInput>& blocks,
    std::optional<int> epsilon_hint = std::nullopt,
    const std::vector<double>& betas = {});

/// Lazily enumerated family of balanced equilibria
/// Z' = (s s^T - I)/sqrt(n1 (n1-1)) on the leading n1 nodes, zero-padded to
/// n x n; s and -s are identified by fixing s_1 = +1, so there are exactly
/// 2^(n1-1) members, indexed by the remaining sign bits.
class BalancedFamily {
public:
    BalancedFamily(int n1, int n);

    std::uint64_t size() const { return std::uint64_t{1} << (n1_ - 1); }
    SphereAppraisal operator[](std::uint64_t index) const;
    std::vector<int> sign_vector(std::uint64_t index) const;

    int n1() const { return n1_; }
    int n() const { return n_; }

private:
    int n1_;
    int n_;
};

inline BalancedFamily enumerate_balanced(int n1, int n) { return BalancedFamily(n1, n); }

/// Jacobian-trace instability certificate (n^2 - n + 3) D(z*); strictly
/// positive implies instability. Requires residual(z*) < 1e-6.
double instability_certificate(const SphereAppraisal& z_star);

}  // namespace balanceflow
