#include "balanceflow/equilibria.hpp"

#include "balanceflow/balance.hpp"
#include "balanceflow/dissonance.hpp"
#include "balanceflow/dynamics.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace balanceflow;

namespace {

/// Sorted eigenvalues of a symmetric matrix.
Eigen::VectorXd spectrum(const Matrix& z) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(z);
    return es.eigenvalues();
}

/// Expected sorted spectrum {-q (x n-k), p-q (x k)} of an irreducible equilibrium.
Eigen::VectorXd expected_spectrum(int n, int k) {
    const double p = std::sqrt(double(n) / (k * double(n - k)));
    const double q = std::sqrt(double(k) / (n * double(n - k)));
    Eigen::VectorXd v(n);
    for (int i = 0; i < n - k; ++i) v(i) = -q;
    for (int i = n - k; i < n; ++i) v(i) = p - q;
    return v;
}

}  // namespace

TEST_SUITE("equilibria") {

TEST_CASE("normalized frame factories validate their constraints") {
    CHECK(is_nst(nst_k1(4, {1, 1, -1, 1}).v()).ok);
    CHECK_THROWS_AS(nst_k1(4, {1, 2, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(nst_k1(3, {1, 1}), std::invalid_argument);

    for (int n = 3; n <= 8; ++n) CHECK(is_nst(nst_k2(n, regular_ngon_angles(n)).v()).ok);
    CHECK_THROWS_AS(nst_k2(3, {0.0, 0.1, 0.2}), std::invalid_argument);

    std::mt19937_64 rng(501);
    const Matrix u1 = testutil::random_orthogonal(3, rng);
    const Matrix u2 = testutil::random_orthogonal(3, rng);
    CHECK(is_nst(nst_stacked(u1, u2).v()).ok);

    Matrix not_orthogonal = Matrix::Ones(3, 3);
    CHECK_THROWS_AS(nst_stacked(not_orthogonal, u2), std::invalid_argument);

    const NstResiduals bad = is_nst(Matrix::Ones(4, 2));
    CHECK(!bad.ok);
    CHECK(bad.orthogonality > 1e-10);
}

TEST_CASE("harmonic frames cover every 1 <= k <= n and reduce to the closed forms") {
    for (int n = 2; n <= 8; ++n)
        for (int k = 1; k <= n; ++k) CHECK(is_nst(nst_harmonic(n, k).v()).ok);

    for (int n = 3; n <= 6; ++n) {
        const Matrix k1 = nst_harmonic(n, 1).v();
        CHECK((k1 - nst_k1(n, std::vector<int>(n, 1)).v()).cwiseAbs().maxCoeff() <= 1e-12);
        // The k = 2 harmonic frame is the angle parameterization at 2 pi m / n.
        const Matrix k2 = nst_harmonic(n, 2).v();
        const double pi = std::acos(-1.0);
        std::vector<double> angles(n);
        for (int m = 0; m < n; ++m) angles[m] = 2.0 * pi * m / n;
        CHECK((k2 - nst_k2(n, angles).v()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("irreducible equilibrium closed form at (4, 1)") {
    const SphereAppraisal z = build_irreducible(4, 1, nst_k1(4, {1, 1, 1, 1}));
    const Matrix& m = z.matrix();
    const double off = 1.0 / (2.0 * std::sqrt(3.0));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(m(i, j) == doctest::Approx(i == j ? 0.0 : off).epsilon(1e-14));

    const Eigen::VectorXd lambda = spectrum(m);
    CHECK(lambda(3) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(lambda(i) == doctest::Approx(-off).epsilon(1e-12));
}

TEST_CASE("spectrum law holds for random frames at every (n, k)") {
    std::mt19937_64 rng(502);
    for (int n = 2; n <= 8; ++n) {
        for (int k = 1; k < n; ++k) {
            // Rotating the columns of a frame preserves both nSt constraints.
            const Matrix v = nst_harmonic(n, k).v() * testutil::random_orthogonal(k, rng);
            const SphereAppraisal z = build_irreducible(n, k, NstMatrix(n, k, v));
            CHECK((spectrum(z.matrix()) - expected_spectrum(n, k)).cwiseAbs().maxCoeff() <=
                  1e-9);
            CHECK(std::abs(z.matrix().trace()) <= 1e-10);
            CHECK(std::abs(z.matrix().norm() - 1.0) <= 1e-10);
            CHECK(residual(z) < 1e-9);
            CHECK(rhs(ModelKind::ProjectedPureInfluence, z.matrix()).norm() < 1e-9);
            CHECK(dissonance(z.matrix()) ==
                  doctest::Approx(equilibrium_dissonance(n, k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("equilibrium energy closed form and monotonicity in k") {
    CHECK(equilibrium_dissonance(10, 1) ==
          doctest::Approx(-8.0 / std::sqrt(90.0)).epsilon(1e-15));
    CHECK(equilibrium_dissonance(6, 2) ==
          doctest::Approx(-2.0 / std::sqrt(48.0)).epsilon(1e-15));
    CHECK(equilibrium_dissonance(4, 2) == doctest::Approx(0.0));
    for (int n = 3; n <= 8; ++n)
        for (int k = 2; k < n; ++k)
            CHECK(equilibrium_dissonance(n, k) > equilibrium_dissonance(n, k - 1));
}

TEST_CASE("two-eigenvalue reconstruction recovers the block scales") {
    std::mt19937_64 rng(503);
    std::uniform_real_distribution<double> ua(-0.8, 0.8);
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = ua(rng);
        std::uniform_real_distribution<double> ub(std::max(0.0, -alpha * alpha) + 0.01, 1.0);
        const double beta = ub(rng);
        const double root = std::sqrt(alpha * alpha + beta);
        const double p = 2.0 * root, q = root - alpha;
        const int n = 5, k = 2;
        const Matrix v = nst_harmonic(n, k).v() * testutil::random_orthogonal(k, rng);
        const Matrix z = p * (v * v.transpose()) - q * Matrix::Identity(n, n);
        const Eigen::VectorXd lambda = spectrum(z);
        // Recover p, q from the two distinct eigenvalues, then alpha.
        const double q_rec = -lambda(0);
        const double p_rec = lambda(n - 1) + q_rec;
        CHECK(p_rec == doctest::Approx(p).epsilon(1e-10));
        CHECK(q_rec == doctest::Approx(q).epsilon(1e-10));
        CHECK(p_rec / 2.0 - q_rec == doctest::Approx(alpha).epsilon(1e-9));
    }
}

TEST_CASE("single-block reducible build reproduces the irreducible matrix") {
    const auto [spec, z] = build_reducible({BlockInput{4, 1, nst_k1(4, {1, 1, 1, 1})}});
    const SphereAppraisal direct = build_irreducible(4, 1, nst_k1(4, {1, 1, 1, 1}));
    CHECK((z.matrix() - direct.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(spec.epsilon == 1);
    CHECK(spec.alpha == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));
    REQUIRE(spec.blocks.size() == 1);
    CHECK(spec.blocks[0].beta == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("(3,1) + (3,1) reducible equilibrium matches the closed-form scales") {
    const NstMatrix v31 = nst_k1(3, {1, 1, 1});
    const auto [spec, z] = build_reducible({BlockInput{3, 1, v31}, BlockInput{3, 1, v31}});
    CHECK(spec.epsilon == 1);
    CHECK(spec.alpha == doctest::Approx(1.0 / std::sqrt(48.0)).epsilon(1e-12));
    for (const EquilibriumBlock& block : spec.blocks) {
        CHECK(block.beta == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(block.q == doctest::Approx(2.0 / std::sqrt(48.0)).epsilon(1e-12));
        CHECK(block.p == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    }
    CHECK(residual(z) < 1e-9);
    CHECK(dissonance(z.matrix()) == doctest::Approx(-2.0 * spec.alpha).epsilon(1e-10));
    // Energy ordering: block-diagonal equilibrium cannot beat the irreducible one.
    CHECK(dissonance(z.matrix()) >= equilibrium_dissonance(6, 2) - 1e-12);
}

TEST_CASE("epsilon = 0 blocks require caller betas summing correctly") {
    const NstMatrix v21 = nst_k1(2, {1, 1});
    const auto [spec, z] = build_reducible({BlockInput{2, 1, v21}, BlockInput{2, 1, v21}});
    CHECK(spec.epsilon == 0);
    CHECK(spec.alpha == 0.0);
    CHECK(spec.blocks[0].beta == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(residual(z) < 1e-9);
    CHECK(z.matrix()(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

    // Explicit betas must satisfy sum beta_i n_i = 1.
    const auto [spec2, z2] = build_reducible({BlockInput{2, 1, v21}, BlockInput{2, 1, v21}},
                                             std::nullopt, {0.375, 0.125});
    CHECK(residual(z2) < 1e-9);
    CHECK(z2.matrix()(0, 1) == doctest::Approx(std::sqrt(0.375)).epsilon(1e-12));
    CHECK_THROWS_AS(build_reducible({BlockInput{2, 1, v21}, BlockInput{2, 1, v21}},
                                    std::nullopt, {0.5, 0.5}),
                    std::invalid_argument);
}

TEST_CASE("mixed-sign blocks and wrong epsilon hints are rejected") {
    const NstMatrix v31 = nst_k1(3, {1, 1, 1});
    const NstMatrix v43 = nst_harmonic(4, 3);
    // sign(3 - 2) = +1 vs sign(4 - 6) = -1: incompatible.
    CHECK_THROWS_AS(build_reducible({BlockInput{3, 1, v31}, BlockInput{4, 3, v43}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_reducible({BlockInput{3, 1, v31}}, -1), std::invalid_argument);
}

TEST_CASE("zero blocks are carried but excluded from the scaling budget") {
    const NstMatrix v31 = nst_k1(3, {1, 1, 1});
    const auto [spec, z] = build_reducible({BlockInput{3, 1, v31}, BlockInput{2}});
    REQUIRE(z.matrix().rows() == 5);
    CHECK(z.matrix().block(3, 3, 2, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.matrix().block(0, 3, 3, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(z.matrix().norm() - 1.0) <= 1e-10);
    CHECK(residual(z) < 1e-9);
    // Same scales as a lone (3, 1) block.
    CHECK(spec.alpha == doctest::Approx(1.0 / std::sqrt(24.0)).epsilon(1e-12));
}

TEST_CASE("balanced family enumerates 2^(n1-1) distinct fixed points") {
    for (int n1 : {2, 3, 4}) {
        const BalancedFamily family = enumerate_balanced(n1, n1);
        CHECK(family.size() == (std::uint64_t{1} << (n1 - 1)));
        for (std::uint64_t a = 0; a < family.size(); ++a) {
            const SphereAppraisal z = family[a];
            CHECK(classify(z.matrix()).balanced());
            CHECK(residual(z) < 1e-9);
            CHECK(family.sign_vector(a)[0] == 1);
            for (std::uint64_t b = a + 1; b < family.size(); ++b)
                CHECK((z.matrix() - family[b].matrix()).norm() > 1e-6);
        }
    }
}

TEST_CASE("padded balanced members have the Cor-4.7 spectral signature") {
    const BalancedFamily family = enumerate_balanced(4, 6);
    const SphereAppraisal z = family[2];
    CHECK(z.matrix().row(4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.matrix().row(5).cwiseAbs().maxCoeff() == 0.0);
    const EigenSignCounts counts = count_eigen_signs(z.matrix());
    CHECK(counts.pos == 1);
    CHECK(counts.zero == 2);  // n - n1
    CHECK(counts.neg == 3);   // n1 - 1

    CHECK_THROWS_AS(enumerate_balanced(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_balanced(5, 4), std::invalid_argument);
}

TEST_CASE("instability certificate is the Jacobian trace at the equilibrium") {
    const SphereAppraisal stable = build_irreducible(5, 1, nst_k1(5, {1, 1, 1, 1, 1}));
    const SphereAppraisal unstable = build_irreducible(5, 4, nst_harmonic(5, 4));
    const double expected = 23.0 * 3.0 / std::sqrt(20.0);
    CHECK(instability_certificate(stable) == doctest::Approx(-expected).epsilon(1e-9));
    CHECK(instability_certificate(unstable) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(instability_certificate(unstable) > 0.0);

    std::mt19937_64 rng(504);
    const SphereAppraisal not_an_equilibrium{testutil::random_sym_unit(5, rng)};
    CHECK_THROWS_AS(instability_certificate(not_an_equilibrium), std::invalid_argument);
}

TEST_CASE("equilibrium spec serializes blocks and scales") {
    const auto [spec, z] = build_reducible({BlockInput{3, 1, nst_k1(3, {1, -1, 1})}});
    const nlohmann::json j = spec_to_json(spec);
    CHECK(j.at("epsilon") == 1);
    CHECK(j.at("alpha").get<double>() == doctest::Approx(1.0 / std::sqrt(24.0)));
    REQUIRE(j.at("blocks").size() == 1);
    const auto& block = j.at("blocks")[0];
    CHECK(block.at("n") == 3);
    CHECK(block.at("k") == 1);
    CHECK(block.contains("p"));
    CHECK(block.contains("q"));
    CHECK(block.contains("beta"));
    CHECK(block.at("V").size() == 3);
    CHECK(j.at("permutation").size() == 3);
}

}  // TEST_SUITE
