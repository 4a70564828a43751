#include "balanceflow/balance.hpp"

#include "balanceflow/equilibria.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace balanceflow;

namespace {

/// Complete symmetric sign matrix from one bit per upper-triangle edge.
Matrix complete_from_bits(int n, unsigned bits) {
    Matrix x = Matrix::Zero(n, n);
    int edge = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++edge)
            x(i, j) = x(j, i) = (bits >> edge & 1u) ? 1.0 : -1.0;
    return x;
}

}  // namespace

TEST_SUITE("balance") {

TEST_CASE("faction partition agrees with triad positivity on all complete patterns") {
    for (int n : {3, 4}) {
        const int edges = n * (n - 1) / 2;
        for (unsigned bits = 0; bits < (1u << edges); ++bits) {
            const Matrix x = complete_from_bits(n, bits);
            const SignPattern p = sign_pattern(x);
            REQUIRE(is_complete(p));
            const TriadCheck triads = all_triads_positive(p);
            const BalanceVerdict verdict = faction_partition(p);
            CHECK(verdict.balanced() == triads.ok);
            // Complete patterns never classify as component-wise balance.
            CHECK(verdict.kind != BalanceVerdict::Kind::BalancedComponents);
            CHECK(verdict.kind != BalanceVerdict::Kind::Incomplete);
            if (!triads.ok) {
                REQUIRE(triads.witness.has_value());
                const auto [i, j, k] = *triads.witness;
                CHECK(p.sign(i, j) * p.sign(j, k) * p.sign(k, i) <= 0);
            }
        }
    }
}

TEST_CASE("two-faction verdicts carry a consistent assignment with both signs") {
    // s = (+, +, -, -, +): a genuine two-faction split.
    const std::vector<int> s = {1, 1, -1, -1, 1};
    const int n = 5;
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) x(i, j) = s[i] * s[j] * 0.7;
    const BalanceVerdict verdict = faction_partition(sign_pattern(x));
    REQUIRE(verdict.kind == BalanceVerdict::Kind::BalancedTwoFactions);
    CHECK(verdict.assignment[0] == 1);  // root normalized to +1
    bool has_plus = false, has_minus = false;
    for (int i = 0; i < n; ++i) {
        CHECK(verdict.assignment[i] == s[i]);  // s[0] = +1 so signs match exactly
        has_plus |= verdict.assignment[i] == 1;
        has_minus |= verdict.assignment[i] == -1;
        for (int j = 0; j < n; ++j)
            if (i != j)
                CHECK(verdict.assignment[i] * verdict.assignment[j] ==
                      (x(i, j) > 0 ? 1 : -1));
    }
    CHECK(has_plus);
    CHECK(has_minus);
    CHECK(verdict.factions.size() == 2);
}

TEST_CASE("all-positive pattern is one faction") {
    Matrix x = Matrix::Ones(4, 4);
    x.diagonal().setZero();
    const BalanceVerdict verdict = faction_partition(sign_pattern(x));
    CHECK(verdict.kind == BalanceVerdict::Kind::BalancedOneFaction);
    REQUIRE(verdict.factions.size() == 1);
    CHECK(verdict.factions[0].size() == 4);
}

TEST_CASE("sign-asymmetric edges are unbalanced with an edge witness") {
    Matrix x = Matrix::Ones(3, 3);
    x.diagonal().setZero();
    x(0, 1) = -1.0;  // x(1, 0) stays +1
    const BalanceVerdict verdict = faction_partition(sign_pattern(x));
    CHECK(verdict.kind == BalanceVerdict::Kind::Unbalanced);
    REQUIRE(verdict.witness_edge.has_value());
    CHECK((*verdict.witness_edge)[0] == 0);
    CHECK((*verdict.witness_edge)[1] == 1);
}

TEST_CASE("all-negative triangle is unbalanced with the smallest triad witness") {
    Matrix x = Matrix::Constant(3, 3, -1.0 / std::sqrt(6.0));
    x.diagonal().setZero();
    const BalanceVerdict verdict = classify(x);
    REQUIRE(verdict.kind == BalanceVerdict::Kind::Unbalanced);
    REQUIRE(verdict.witness_triad.has_value());
    CHECK(*verdict.witness_triad == std::array<int, 3>{0, 1, 2});

    const nlohmann::json j = verdict_to_json(verdict);
    CHECK(j.at("verdict") == "Unbalanced");
    CHECK(j.at("witness") == nlohmann::json({1, 2, 3}));  // 1-based in serialized form
}

TEST_CASE("padded balanced equilibria classify component-wise with isolated nodes") {
    const BalancedFamily family = enumerate_balanced(3, 5);
    const BalanceVerdict verdict = classify(family[1].matrix());
    REQUIRE(verdict.kind == BalanceVerdict::Kind::BalancedComponents);
    CHECK(verdict.isolated == std::vector<int>{3, 4});
    REQUIRE(verdict.components.size() == 1);
    CHECK(verdict.components[0].nodes == std::vector<int>{0, 1, 2});
}

TEST_CASE("two disjoint cliques are component-wise balanced") {
    Matrix x = Matrix::Zero(5, 5);
    x(0, 1) = x(1, 0) = 1.0;
    for (int i = 2; i < 5; ++i)
        for (int j = 2; j < 5; ++j)
            if (i != j) x(i, j) = -0.5;  // all-negative triangle inside: unbalanced clique
    BalanceVerdict verdict = classify(x);
    CHECK(verdict.kind == BalanceVerdict::Kind::Unbalanced);  // one bad component poisons it

    for (int i = 2; i < 5; ++i)
        for (int j = 2; j < 5; ++j)
            if (i != j) x(i, j) = 0.5;
    verdict = classify(x);
    REQUIRE(verdict.kind == BalanceVerdict::Kind::BalancedComponents);
    CHECK(verdict.components.size() == 2);
    CHECK(verdict.isolated.empty());
}

TEST_CASE("a path is incomplete rather than balanced") {
    Matrix x = Matrix::Zero(3, 3);
    x(0, 1) = x(1, 0) = 1.0;
    x(1, 2) = x(2, 1) = 1.0;  // edge (0,2) missing: component is not a clique
    CHECK(faction_partition(sign_pattern(x)).kind == BalanceVerdict::Kind::Incomplete);
}

TEST_CASE("n = 4 cyclic equilibrium is incomplete as a graph and not balanced") {
    const SphereAppraisal z = build_irreducible(4, 2, nst_k2(4, regular_ngon_angles(4)));
    const SignPattern p = sign_pattern(z.matrix());
    CHECK(!is_complete(p));
    // Cycle + - chain with one negative edge: odd negative cycle.
    const BalanceVerdict verdict = faction_partition(p);
    CHECK(verdict.kind == BalanceVerdict::Kind::Unbalanced);
    CHECK(!verdict.balanced());
}

TEST_CASE("classification is invariant under positive scaling") {
    std::mt19937_64 rng(401);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix z = testutil::random_sym_unit(5, rng);
        const BalanceVerdict base = classify(z);
        for (double c : {0.5, 3.0, 100.0}) {
            CHECK(classify(Matrix(c * z)).kind == base.kind);
        }
    }
}

TEST_CASE("eigen sign census uses the zero band and requires symmetry") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = -1e-8;  // inside the 1e-7 band: counts as zero
    d(2, 2) = -1.0;
    const EigenSignCounts counts = count_eigen_signs(d);
    CHECK(counts.pos == 1);
    CHECK(counts.zero == 1);
    CHECK(counts.neg == 1);

    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(count_eigen_signs(bad), std::invalid_argument);
}

TEST_CASE("verdict json uses 1-based factions and isolated nodes") {
    const BalancedFamily family = enumerate_balanced(3, 4);
    const nlohmann::json j = verdict_to_json(classify(family[0].matrix()));
    CHECK(j.at("verdict") == "BalancedComponents");
    CHECK(j.at("isolated") == nlohmann::json({4}));
    const auto& factions = j.at("factions");
    REQUIRE(!factions.empty());
    for (const auto& faction : factions)
        for (const auto& node : faction) CHECK(node.get<int>() >= 1);
}

}  // TEST_SUITE
