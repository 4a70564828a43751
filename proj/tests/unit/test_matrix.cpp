#include "balanceflow/matrix.hpp"

#include "test_util.hpp"

#include "doctest.h"

#include <random>
#include <stdexcept>

using namespace balanceflow;
using testutil::random_matrix;
using testutil::random_sym_unit;

TEST_SUITE("matrix") {

TEST_CASE("frobenius inner product reconstructs the norm") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + int(rng() % 7);
        const Matrix a = random_matrix(n, rng, -3.0, 3.0);
        const double via_inner = std::sqrt(frobenius_inner(a, a));
        CHECK(std::abs(via_inner - a.norm()) <= 1e-12 * (1.0 + a.norm()));
    }
}

TEST_CASE("skew / symmetric-zero-diagonal / diagonal parts are orthogonal and sum back") {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + int(rng() % 7);
        const Matrix a = random_matrix(n, rng, -2.0, 2.0);
        const Matrix skew = 0.5 * (a - a.transpose());
        Matrix sym = 0.5 * (a + a.transpose());
        const Matrix diag = Matrix(sym.diagonal().asDiagonal());
        sym.diagonal().setZero();

        CHECK((skew + sym + diag - a).norm() <= 1e-13 * (1.0 + a.norm()));
        CHECK(std::abs(frobenius_inner(skew, sym)) <= 1e-12);
        CHECK(std::abs(frobenius_inner(skew, diag)) <= 1e-12);
        CHECK(std::abs(frobenius_inner(sym, diag)) <= 1e-12);
    }
}

TEST_CASE("tangent projection is idempotent, tangent, and zero-diagonal") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 3 + int(rng() % 5);
        const SphereAppraisal z{random_sym_unit(n, rng)};
        const AppraisalMatrix y{testutil::random_zero_diag(n, rng)};
        const Matrix p = tangent_project(z, y).matrix();
        CHECK(std::abs(frobenius_inner(p, z.matrix())) <= 1e-12);
        CHECK(p.diagonal().cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((tangent_project(z, AppraisalMatrix{p}).matrix() - p).norm() <= 1e-12);
    }
}

TEST_CASE("appraisal matrices reject nonzero diagonals above the tolerance") {
    Matrix bad = Matrix::Zero(3, 3);
    bad(1, 1) = 1e-6;
    CHECK_THROWS_AS(AppraisalMatrix{bad}, std::invalid_argument);

    Matrix ok = Matrix::Zero(3, 3);
    ok(0, 1) = 1.0;
    ok(2, 2) = 5e-13;  // below the 1e-12 reader tolerance: absorbed to exact zero
    const AppraisalMatrix a(ok);
    CHECK(a.matrix()(2, 2) == 0.0);
}

TEST_CASE("sphere states renormalize drift and reject genuine norm errors") {
    std::mt19937_64 rng(104);
    Matrix z = random_sym_unit(4, rng);
    const SphereAppraisal drifted(Matrix(z * (1.0 + 5e-10)));
    CHECK(std::abs(drifted.matrix().norm() - 1.0) <= 1e-15);
    CHECK_THROWS_AS(SphereAppraisal(Matrix(z * 1.1)), std::invalid_argument);
    CHECK_THROWS_AS(SphereAppraisal(Matrix(z * 0.9)), std::invalid_argument);
}

TEST_CASE("sign extraction honors the zero tolerance and scale invariance") {
    Matrix z = Matrix::Zero(3, 3);
    z(0, 1) = 2e-7;
    z(1, 0) = -2e-7;
    z(1, 2) = 5e-8;  // below zero_tol = 1e-7: reads as 0
    const SignPattern p = sign_pattern(z);
    CHECK(p.sign(0, 1) == 1);
    CHECK(p.sign(1, 0) == -1);
    CHECK(p.sign(1, 2) == 0);
    CHECK(p.sign(2, 1) == 0);

    std::mt19937_64 rng(105);
    const Matrix w = random_sym_unit(5, rng);
    CHECK(sign_pattern(w) == sign_pattern(Matrix(3.0 * w)));
    CHECK(sign_pattern(w) == sign_pattern(Matrix(0.01 * w)));
}

TEST_CASE("sign pattern equality compares dimensions and entries") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = 1.0;
    Matrix b = a;
    CHECK(sign_pattern(a) == sign_pattern(b));
    b(0, 1) = -1.0;
    CHECK(!(sign_pattern(a) == sign_pattern(b)));
    CHECK(!(sign_pattern(a) == sign_pattern(Matrix::Zero(4, 4))));
}

TEST_CASE("normalize_to_sphere splits norm and direction") {
    std::mt19937_64 rng(106);
    const Matrix x = 7.5 * testutil::random_symmetric_zero_diag(4, rng);
    const EtaZState state = normalize_to_sphere(AppraisalMatrix(x));
    CHECK(state.eta == doctest::Approx(x.norm()).epsilon(1e-14));
    CHECK(std::abs(state.z.matrix().norm() - 1.0) <= 1e-12);
    CHECK((state.z.matrix() * state.eta - x).norm() <= 1e-9 * x.norm());
}

}  // TEST_SUITE
