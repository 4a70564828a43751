#pragma once

#include "balanceflow/matrix.hpp"

#include <optional>
#include <vector>

namespace balanceflow {

/// Positive per-node scale gamma certifying that X diag(gamma) is symmetric.
/// Only the ratios within a connected component of the nonzero pattern are
/// meaningful, so construction normalizes the whole vector by gamma[0];
/// find_witness additionally pins every component root to 1.
class ScaleWitness {
public:
    explicit ScaleWitness(std::vector<double> gamma);

    int n() const { return static_cast<int>(gamma_.size()); }
    const std::vector<double>& gamma() const { return gamma_; }

private:
    std::vector<double> gamma_;
};

/// Conjugate a symmetric zero-diagonal matrix into the scale-symmetric set:
/// X = G^{1/2} x_s G^{-1/2} with G = diag(gamma), i.e.
/// x_ij = sqrt(gamma_i/gamma_j) (x_s)_ij. The result satisfies
/// X diag(gamma) = (X diag(gamma))^T and keeps the zero diagonal.
AppraisalMatrix make_scale_symmetric(const AppraisalMatrix& x_s, const ScaleWitness& gamma);

/// Solve x_ij gamma_j = x_ji gamma_i by ratio propagation over a spanning
/// forest of the nonzero pattern, then verify every edge within `tol`
/// (relative). Requires a sign-symmetric pattern (x_ij != 0 iff x_ji != 0,
/// with equal signs); returns none when no positive solution exists.
std::optional<ScaleWitness> find_witness(const AppraisalMatrix& x, double tol = 1e-8);

/// trace(X^2) for a scale-symmetric matrix; equals
/// sum_ij (gamma_j/gamma_i) x_ij^2, hence >= 0 with equality only at X = 0.
/// Errors when no witness exists.
double check_trace_square(const AppraisalMatrix& x, double tol = 1e-8);

/// diag(gamma)^{-1/2} X diag(gamma)^{1/2}: symmetric when gamma witnesses X,
/// exposing the real spectrum of a scale-symmetric matrix.
Matrix symmetrizing_similarity(const AppraisalMatrix& x, const ScaleWitness& gamma);

}  // namespace balanceflow
