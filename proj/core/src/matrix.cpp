#include "balanceflow/matrix.hpp"

#include <cmath>

namespace balanceflow {

AppraisalMatrix::AppraisalMatrix(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        throw std::invalid_argument("appraisal matrix must be square with n >= 1");
    }
    if (!m_.allFinite()) {
        throw std::invalid_argument("appraisal matrix entries must be finite");
    }
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
        if (std::abs(m_(i, i)) > diag_tol) {
            throw std::invalid_argument("appraisal matrix diagonal must be zero");
        }
        m_(i, i) = 0.0;
    }
}

SphereAppraisal::SphereAppraisal(const AppraisalMatrix& x) : inner_(x) {
    const double nrm = x.matrix().norm();
    if (std::abs(nrm - 1.0) > norm_tol) {
        throw std::invalid_argument("sphere state must have unit Frobenius norm within 1e-9");
    }
    inner_ = AppraisalMatrix(x.matrix() / nrm);
}

SignPattern::SignPattern(Eigen::MatrixXi signs) : s_(std::move(signs)) {
    if (s_.rows() < 1 || s_.rows() != s_.cols()) {
        throw std::invalid_argument("sign pattern must be square with n >= 1");
    }
    for (Eigen::Index i = 0; i < s_.rows(); ++i) {
        for (Eigen::Index j = 0; j < s_.cols(); ++j) {
            if (i == j ? s_(i, j) != 0 : std::abs(s_(i, j)) > 1) {
                throw std::invalid_argument("sign pattern entries must be in {-1,0,+1} with zero diagonal");
            }
        }
    }
}

EtaZState::EtaZState(double eta_in, SphereAppraisal z_in) : eta(eta_in), z(std::move(z_in)) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("eta must be positive and finite");
    }
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("frobenius_inner: dimension mismatch");
    }
    return (a.array() * b.array()).sum();
}

double frobenius_norm(const Matrix& a) { return a.norm(); }

EtaZState normalize_to_sphere(const AppraisalMatrix& x) {
    const double eta = x.matrix().norm();
    if (eta == 0.0) {
        throw std::invalid_argument("normalize_to_sphere: zero matrix has no direction");
    }
    return EtaZState(eta, SphereAppraisal(AppraisalMatrix(x.matrix() / eta)));
}

AppraisalMatrix tangent_project(const SphereAppraisal& z, const AppraisalMatrix& y) {
    if (z.n() != y.n()) {
        throw std::invalid_argument("tangent_project: dimension mismatch");
    }
    const double c = frobenius_inner(y.matrix(), z.matrix());
    return AppraisalMatrix(y.matrix() - c * z.matrix());
}

SignPattern sign_pattern(const Matrix& x, double zero_tol) {
    if (zero_tol < 0.0) {
        throw std::invalid_argument("sign_pattern: zero_tol must be nonnegative");
    }
    Eigen::MatrixXi s = Eigen::MatrixXi::Zero(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (i == j) continue;
            if (x(i, j) > zero_tol) s(i, j) = 1;
            else if (x(i, j) < -zero_tol) s(i, j) = -1;
        }
    }
    return SignPattern(std::move(s));
}

}  // namespace balanceflow
