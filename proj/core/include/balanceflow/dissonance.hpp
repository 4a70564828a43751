#pragma once

#include "balanceflow/matrix.hpp"

namespace balanceflow {

/// Dissonance energy D(X) = -trace(X^3) = -sum over ordered triads of
/// x_ij x_jk x_ki. Bounded by |D| <= 1 on unit-Frobenius-norm zero-diagonal
/// matrices; strictly negative on balanced complete networks.
double dissonance(const Matrix& x);

/// Asymmetric generalization -trace(Z^T Z^2) = -<Z^2, Z>. Coincides with
/// dissonance(z) when z is symmetric. Exposed as an energy only; no
/// gradient identity is claimed off the symmetric set.
double dissonance_asym(const Matrix& z);

/// max |x - x^T| symmetry defect; gradient formulas require <= 1e-10.
double symmetry_defect(const Matrix& x);

/// Ambient gradient of D at a symmetric zero-diagonal x:
/// grad D(x) = -3 (x^2 - diag(x^2)). Errors on non-symmetric input.
Matrix grad_ambient(const AppraisalMatrix& x);

/// Sphere-restricted gradient at symmetric unit-norm z:
/// grad D(z) = -3 (z^2 - diag(z^2) + D(z) z). Tangent to the sphere at z.
Matrix grad_sphere(const SphereAppraisal& z);

/// Initial-energy threshold guaranteeing convergence to structural balance:
/// -(n-3)/sqrt((n-1)(n-2)), defined for n >= 3.
double balance_threshold(int n);

inline constexpr double symmetry_tol = 1e-10;

}  // namespace balanceflow
