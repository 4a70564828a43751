#include "balanceflow/balance.hpp"

#include <nlohmann/json.hpp>

#include <deque>
#include <stdexcept>

namespace balanceflow {

const char* to_string(BalanceVerdict::Kind kind) {
    switch (kind) {
        case BalanceVerdict::Kind::BalancedOneFaction: return "BalancedOneFaction";
        case BalanceVerdict::Kind::BalancedTwoFactions: return "BalancedTwoFactions";
        case BalanceVerdict::Kind::BalancedComponents: return "BalancedComponents";
        case BalanceVerdict::Kind::Unbalanced: return "Unbalanced";
        case BalanceVerdict::Kind::Incomplete: return "Incomplete";
    }
    return "?";
}

bool is_complete(const SignPattern& p) {
    for (int i = 0; i < p.n(); ++i)
        for (int j = 0; j < p.n(); ++j)
            if (i != j && p.sign(i, j) == 0) return false;
    return true;
}

TriadCheck all_triads_positive(const SignPattern& p) {
    const int n = p.n();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                if (p.sign(i, j) * p.sign(j, k) * p.sign(k, i) <= 0 ||
                    p.sign(i, k) * p.sign(k, j) * p.sign(j, i) <= 0) {
                    return {false, std::array<int, 3>{i, j, k}};
                }
            }
    return {true, std::nullopt};
}

namespace {

std::vector<std::vector<int>> split_factions(const std::vector<int>& nodes,
                                             const std::vector<int>& s) {
    std::vector<int> plus, minus;
    for (int v : nodes) (s[v] > 0 ? plus : minus).push_back(v);
    std::vector<std::vector<int>> out;
    if (!plus.empty()) out.push_back(std::move(plus));
    if (!minus.empty()) out.push_back(std::move(minus));
    return out;
}

}  // namespace

BalanceVerdict faction_partition(const SignPattern& p) {
    const int n = p.n();
    BalanceVerdict v;
    v.assignment.assign(n, 0);

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (p.sign(i, j) != p.sign(j, i)) {
                v.kind = BalanceVerdict::Kind::Unbalanced;
                v.witness_edge = std::array<int, 2>{i, j};
                return v;
            }

    std::vector<bool> has_edge(n, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && p.sign(i, j) != 0) has_edge[i] = true;
    for (int i = 0; i < n; ++i)
        if (!has_edge[i]) v.isolated.push_back(i);

    const bool complete = is_complete(p);
    std::vector<int> comp(n, -1);
    int comp_count = 0;

    for (int root = 0; root < n; ++root) {
        if (!has_edge[root] || comp[root] >= 0) continue;
        const int c = comp_count++;
        comp[root] = c;
        v.assignment[root] = 1;
        std::deque<int> queue{root};
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int w = 0; w < n; ++w) {
                const int sg = (w == u) ? 0 : p.sign(u, w);
                if (sg == 0) continue;
                const int want = sg > 0 ? v.assignment[u] : -v.assignment[u];
                if (comp[w] < 0) {
                    comp[w] = c;
                    v.assignment[w] = want;
                    queue.push_back(w);
                } else if (v.assignment[w] != want) {
                    v.kind = BalanceVerdict::Kind::Unbalanced;
                    if (complete) v.witness_triad = all_triads_positive(p).witness;
                    else v.witness_edge = std::array<int, 2>{std::min(u, w), std::max(u, w)};
                    v.assignment.assign(n, 0);
                    return v;
                }
            }
        }
    }

    std::vector<ComponentVerdict> comps(comp_count);
    for (int i = 0; i < n; ++i)
        if (comp[i] >= 0) comps[comp[i]].nodes.push_back(i);
    bool all_cliques = true;
    for (auto& cv : comps) {
        for (size_t a = 0; a < cv.nodes.size() && all_cliques; ++a)
            for (size_t b = a + 1; b < cv.nodes.size(); ++b)
                if (p.sign(cv.nodes[a], cv.nodes[b]) == 0) {
                    all_cliques = false;
                    break;
                }
        cv.factions = split_factions(cv.nodes, v.assignment);
        cv.two_factions = cv.factions.size() == 2;
        for (const auto& f : cv.factions) v.factions.push_back(f);
    }
    v.components = std::move(comps);

    if (complete && comp_count == 1) {
        v.kind = v.components[0].two_factions ? BalanceVerdict::Kind::BalancedTwoFactions
                                              : BalanceVerdict::Kind::BalancedOneFaction;
        return v;
    }
    if (comp_count == 0 || !all_cliques) {
        v.kind = BalanceVerdict::Kind::Incomplete;
        return v;
    }
    v.kind = BalanceVerdict::Kind::BalancedComponents;
    return v;
}

BalanceVerdict classify(const Matrix& z, double zero_tol) {
    return faction_partition(sign_pattern(z, zero_tol));
}

EigenSignCounts count_eigen_signs(const Matrix& z, double zero_band) {
    if (z.rows() != z.cols()) throw std::invalid_argument("count_eigen_signs: matrix must be square");
    if ((z - z.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
        throw std::invalid_argument("count_eigen_signs: input must be symmetric within 1e-8");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (z + z.transpose()), Eigen::EigenvaluesOnly);
    EigenSignCounts c;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam > zero_band) ++c.pos;
        else if (lam < -zero_band) ++c.neg;
        else ++c.zero;
    }
    return c;
}

namespace {

nlohmann::json nodes_1based(const std::vector<int>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (int v : nodes) arr.push_back(v + 1);
    return arr;
}

}  // namespace

nlohmann::json verdict_to_json(const BalanceVerdict& v) {
    nlohmann::json j;
    j["verdict"] = to_string(v.kind);
    auto& factions = j["factions"] = nlohmann::json::array();
    for (const auto& f : v.factions) factions.push_back(nodes_1based(f));
    j["isolated"] = nodes_1based(v.isolated);
    if (v.witness_triad) {
        j["witness"] = {(*v.witness_triad)[0] + 1, (*v.witness_triad)[1] + 1, (*v.witness_triad)[2] + 1};
    } else if (v.witness_edge) {
        j["witness"] = {(*v.witness_edge)[0] + 1, (*v.witness_edge)[1] + 1};
    } else {
        j["witness"] = nullptr;
    }
    if (v.kind == BalanceVerdict::Kind::BalancedComponents) {
        auto& comps = j["components"] = nlohmann::json::array();
        for (const auto& cv : v.components) {
            nlohmann::json cj;
            cj["nodes"] = nodes_1based(cv.nodes);
            cj["verdict"] = cv.two_factions ? "BalancedTwoFactions" : "BalancedOneFaction";
            nlohmann::json cf = nlohmann::json::array();
            for (const auto& f : cv.factions) cf.push_back(nodes_1based(f));
            cj["factions"] = std::move(cf);
            comps.push_back(std::move(cj));
        }
    }
    if (!v.assignment.empty() &&
        (v.kind == BalanceVerdict::Kind::BalancedTwoFactions ||
         v.kind == BalanceVerdict::Kind::BalancedOneFaction ||
         v.kind == BalanceVerdict::Kind::BalancedComponents)) {
        j["assignment"] = v.assignment;
    }
    return j;
}

}  // namespace balanceflow
