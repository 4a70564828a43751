#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

namespace balanceflow {

using Matrix = Eigen::MatrixXd;

/// Interpersonal appraisal state: real n x n matrix with zero diagonal.
/// Entry (i,j) is agent i's signed evaluation of agent j.
///
/// Construction accepts |diagonal| <= 1e-12 (absorbing integrator drift),
/// zeroes it exactly, and rejects anything larger or non-finite. Value type,
/// immutable after construction.
class AppraisalMatrix {
public:
    explicit AppraisalMatrix(Matrix entries);

    int n() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

    static constexpr double diag_tol = 1e-12;

private:
    Matrix m_;
};

/// Unit-Frobenius-norm zero-diagonal matrix: state of the projected models.
/// Construction renormalizes when the norm lies in [1 - 1e-9, 1 + 1e-9]
/// and rejects otherwise, so logic errors are not silently hidden.
class SphereAppraisal {
public:
    explicit SphereAppraisal(const AppraisalMatrix& x);
    explicit SphereAppraisal(Matrix entries) : SphereAppraisal(AppraisalMatrix(std::move(entries))) {}

    int n() const { return inner_.n(); }
    const AppraisalMatrix& inner() const { return inner_; }
    const Matrix& matrix() const { return inner_.matrix(); }

    static constexpr double norm_tol = 1e-9;

private:
    AppraisalMatrix inner_;
};

/// Thresholded sign structure of an appraisal matrix, entries in {-1, 0, +1}.
class SignPattern {
public:
    SignPattern(Eigen::MatrixXi signs);

    int n() const { return static_cast<int>(s_.rows()); }
    int sign(int i, int j) const { return s_(i, j); }
    const Eigen::MatrixXi& signs() const { return s_; }

    bool operator==(const SignPattern& other) const {
        return s_.rows() == other.s_.rows() && (s_.array() == other.s_.array()).all();
    }
    bool operator!=(const SignPattern& other) const { return !(*this == other); }

private:
    Eigen::MatrixXi s_;
};

/// Polar state (eta, Z) of the norm/direction transcription: eta = ||X||_F > 0,
/// Z = X/||X||_F on the unit sphere.
struct EtaZState {
    double eta;
    SphereAppraisal z;

    EtaZState(double eta_in, SphereAppraisal z_in);
};

/// trace(b^T a) = sum of elementwise products. Symmetric in its arguments.
double frobenius_inner(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);

/// Polar decomposition X = eta * Z with eta = ||X||_F. Errors on X = 0.
EtaZState normalize_to_sphere(const AppraisalMatrix& x);

/// Orthogonal projection onto the tangent space of the sphere at z:
/// P(y) = y - <y, z> z. Idempotent; output is Frobenius-orthogonal to z.
AppraisalMatrix tangent_project(const SphereAppraisal& z, const AppraisalMatrix& y);

/// Entrywise thresholded sign: |x_ij| <= zero_tol maps to 0.
SignPattern sign_pattern(const Matrix& x, double zero_tol = 1e-7);

}  // namespace balanceflow
