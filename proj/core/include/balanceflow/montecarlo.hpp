#pragma once

#include "balanceflow/balance.hpp"
#include "balanceflow/dynamics.hpp"
#include "balanceflow/matrix.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace balanceflow {

/// Random initial-condition families: entries iid uniform on [-100, 100].
/// GenericSymmetric samples the strict upper triangle and mirrors it;
/// GenericAsymmetric samples all off-diagonal entries; both keep a zero
/// diagonal. KulakowskiGeneric samples the full matrix (diagonal included)
/// and rescales it to unit Frobenius norm.
enum class Family {
    GenericAsymmetric,
    GenericSymmetric,
    KulakowskiGeneric,
};

const char* to_string(Family family);
std::optional<Family> family_from_string(const std::string& name);

/// How a single trial ended.
///   BalancedFinite           sign pattern stabilized to complete balance
///   BalancedComponentsFinite stabilized to component-wise balance
///   ConvergedUnbalanced      decided, but the limit is not balanced
///   NoDecision               budget ran out, integration failed, or the
///                            run escaped without a stable pattern
enum class OutcomeKind {
    BalancedFinite,
    BalancedComponentsFinite,
    ConvergedUnbalanced,
    NoDecision,
};

const char* to_string(OutcomeKind kind);

struct TrialOutcome {
    OutcomeKind kind = OutcomeKind::NoDecision;
    std::optional<double> t_sign;  // Balanced*Finite: when the final pattern was established
    std::string summary;           // ConvergedUnbalanced limit / NoDecision reason
    double terminal_time = 0.0;
    double terminal_dissonance = 0.0;
    // Metadata on the terminal state: eigen census (direct for symmetric
    // states, through the scale-symmetric similarity when a witness exists),
    // the one-positive-eigenvalue flag derived from it, and whether the
    // off-diagonal part admits a scale witness at all.
    std::optional<EigenSignCounts> eigen_counts;
    std::optional<bool> one_positive_eigen;
    bool witness_present = false;
};

struct TrialRow {
    std::uint64_t seed = 0;
    TrialOutcome outcome;
};

struct MonteCarloReport {
    ModelKind model = ModelKind::ProjectedPureInfluence;
    Family family = Family::GenericSymmetric;
    int n = 0;
    int trials = 0;
    std::uint64_t master_seed = 0;
    std::array<int, 4> counts{};  // indexed by OutcomeKind
    double p_hat = 0.0;           // BalancedFinite count / trials
    std::optional<double> epsilon;   // Chernoff parameters when sizing was used
    std::optional<double> eta_conf;
    IntegratorOptions options;
    double zero_tol = 1e-7;
    double runtime_seconds = 0.0;  // wall clock; excluded from reports by default
    std::vector<TrialRow> rows;    // in trial order

    int count(OutcomeKind k) const { return counts[static_cast<std::size_t>(k)]; }
};

/// Minimal N with N >= (1/(2 eps^2)) ln(2/eta). Both parameters in (0,1).
int chernoff_n(double epsilon, double eta_conf);

/// Deterministic initial condition for a (family, n, seed) triple; n >= 3.
/// Uniform variates come from a fixed 64-bit generator and a fixed mapping
/// into [-100, 100], so results are identical across platforms.
Matrix gen_initial(Family family, int n, std::uint64_t seed);

/// Per-trial seed: splittable counter mix of (master_seed, trial index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index);

/// Integrator options tuned for trial batches: defaults with the sampling
/// stride opened up to max_time, so only the endpoints are recorded.
IntegratorOptions montecarlo_options();

/// Classify one finished trajectory. Balance outcomes require a
/// SignStabilized event; the verdict on its pattern decides the bucket.
/// `zero_tol` thresholds the terminal-state summaries (e.g. the
/// self-loops-only limit of decayed runs).
TrialOutcome classify_outcome(const Trajectory& traj, double zero_tol = 1e-7);

/// Run `trials` independent simulations of the model from family initial
/// conditions (projected models integrate X(0)/||X(0)||) and aggregate the
/// outcome counts. Reports are byte-identical for identical arguments
/// regardless of `workers` (0 = hardware concurrency).
MonteCarloReport run_experiment(ModelKind model, Family family, int n, int trials,
                                std::uint64_t master_seed,
                                const IntegratorOptions& options = montecarlo_options(),
                                int workers = 0, double zero_tol = 1e-7);

/// Full report as JSON; runtime is included only when `include_runtime`.
nlohmann::json report_to_json(const MonteCarloReport& report, bool include_runtime = false);

/// Per-trial CSV: trial, seed, outcome, t_sign, terminal time/dissonance,
/// eigen counts, witness and one-positive-eigenvalue flags.
void write_trials_csv(std::ostream& out, const MonteCarloReport& report);

}  // namespace balanceflow
