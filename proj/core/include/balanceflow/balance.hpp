#pragma once

#include "balanceflow/matrix.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <optional>
#include <vector>

namespace balanceflow {

/// Verdict for one connected component of the appraisal graph.
struct ComponentVerdict {
    std::vector<int> nodes;                  // 0-based, ascending
    bool two_factions = false;
    std::vector<std::vector<int>> factions;  // one or two node lists
};

/// Structural-balance classification result.
///
/// BalancedOneFaction / BalancedTwoFactions are returned only for complete
/// patterns. BalancedComponents covers block structure: every non-singleton
/// component is an internally complete balanced clique, isolated nodes
/// listed separately. Unbalanced carries a witness: the lexicographically
/// smallest nonpositive triad when the pattern is complete, otherwise the
/// sign-inconsistent or coloring-conflict edge. Incomplete is the verdict
/// for patterns with missing appraisals that are two-colorable but whose
/// components are not cliques (balance is not certifiable), including the
/// degenerate no-edge pattern.
struct BalanceVerdict {
    enum class Kind {
        BalancedOneFaction,
        BalancedTwoFactions,
        BalancedComponents,
        Unbalanced,
        Incomplete,
    };

    Kind kind;
    std::vector<int> assignment;             // per node: +1/-1 faction sign, 0 if unassigned
    std::vector<std::vector<int>> factions;  // 0-based node lists (all components concatenated)
    std::vector<int> isolated;               // nodes with zero row and column
    std::optional<std::array<int, 3>> witness_triad;  // 0-based
    std::optional<std::array<int, 2>> witness_edge;   // 0-based
    std::vector<ComponentVerdict> components;

    bool balanced() const {
        return kind == Kind::BalancedOneFaction || kind == Kind::BalancedTwoFactions ||
               kind == Kind::BalancedComponents;
    }
};

const char* to_string(BalanceVerdict::Kind kind);

/// JSON with 1-based node ids: {"verdict", "factions", "isolated", "witness", ...}.
nlohmann::json verdict_to_json(const BalanceVerdict& v);

/// True iff every off-diagonal sign is nonzero.
bool is_complete(const SignPattern& p);

struct TriadCheck {
    bool ok;
    std::optional<std::array<int, 3>> witness;  // smallest (i,j,k), i<j<k, with sign product <= 0
};

/// Checks sign(x_ij) sign(x_jk) sign(x_ki) > 0 over all triads (both
/// orientations). Meaningful on complete patterns; zero products count as
/// violations.
TriadCheck all_triads_positive(const SignPattern& p);

/// Two-coloring by BFS over nonzero edges (positive edge: same faction,
/// negative: opposite), components handled separately, BFS roots in
/// ascending node order, assignment normalized to +1 at each component root.
/// Sign-inconsistent edges (p_ij != p_ji) short-circuit to Unbalanced.
BalanceVerdict faction_partition(const SignPattern& p);

/// sign_pattern + faction_partition on the off-diagonal part of z.
BalanceVerdict classify(const Matrix& z, double zero_tol = 1e-7);

struct EigenSignCounts {
    int pos = 0;
    int zero = 0;
    int neg = 0;
};

/// Eigenvalue sign census of a symmetric matrix; |lambda| <= zero_band
/// counts as zero. Errors when the symmetry defect exceeds 1e-8.
EigenSignCounts count_eigen_signs(const Matrix& z, double zero_band = 1e-7);

}  // namespace balanceflow
