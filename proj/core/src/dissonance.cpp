#include "balanceflow/dissonance.hpp"

#include <cmath>
#include <stdexcept>

namespace balanceflow {

double dissonance(const Matrix& x) {
    // Two products and a trace, O(n^3); the triad triple loop survives only
    // as a test oracle.
    return -(x * x * x).trace();
}

double dissonance_asym(const Matrix& z) {
    return -frobenius_inner(z * z, z);
}

double symmetry_defect(const Matrix& x) {
    return (x - x.transpose()).cwiseAbs().maxCoeff();
}

namespace {

void require_symmetric(const Matrix& x, const char* who) {
    if (symmetry_defect(x) > symmetry_tol) {
        throw std::invalid_argument(std::string(who) + ": input must be symmetric within 1e-10");
    }
}

}  // namespace

Matrix grad_ambient(const AppraisalMatrix& x) {
    require_symmetric(x.matrix(), "grad_ambient");
    Matrix sq = x.matrix() * x.matrix();
    sq.diagonal().setZero();
    return -3.0 * sq;
}

Matrix grad_sphere(const SphereAppraisal& z) {
    require_symmetric(z.matrix(), "grad_sphere");
    const Matrix& zm = z.matrix();
    Matrix sq = zm * zm;
    const double d = dissonance(zm);
    sq.diagonal().setZero();
    return -3.0 * (sq + d * zm);
}

double balance_threshold(int n) {
    if (n < 3) throw std::invalid_argument("balance_threshold: n must be >= 3");
    return -(n - 3.0) / std::sqrt(double(n - 1) * double(n - 2));
}

}  // namespace balanceflow
