#pragma once

#include "balanceflow/matrix.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace balanceflow {

/// The four appraisal flows plus the polar (eta, Z) transcription of the
/// pure-influence model:
///   PureInfluence          X' = X^2 - diag(X^2)         zero-diagonal states
///   Kulakowski             X' = X^2                     unconstrained states
///   ProjectedPureInfluence Z' = Z^2 - diag(Z^2) + D Z   unit-sphere, zero diagonal
///   ProjectedKulakowski    Z' = Z^2 + D Z               unit-sphere
///   EtaZ                   Z' = eta (Z^2 - diag(Z^2) + D Z),  eta' = -D eta^2
/// Both projected models (and EtaZ) use the asymmetric energy
/// D = -trace(Z^T Z^2), which coincides with -trace(Z^3) on symmetric states.
enum class ModelKind {
    PureInfluence,
    Kulakowski,
    ProjectedPureInfluence,
    ProjectedKulakowski,
    EtaZ,
};

const char* to_string(ModelKind model);
std::optional<ModelKind> model_from_string(const std::string& name);

struct IntegratorOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-9;
    double max_time = 1e4;
    double blowup_norm = 1e9;   // Frobenius threshold (eta threshold for EtaZ)
    double grad_tol = 1e-10;    // equilibrium detection: ||rhs|| below this twice in a row
    double sign_window = 1.0;   // trailing hold window for projected runs; unprojected runs use 10% of elapsed time
    double sample_stride = 1e-6;  // minimum time between recorded samples
};

struct Event {
    enum class Kind {
        ConvergedToEquilibrium,
        BlowUp,
        SignStabilized,
        BudgetExhausted,
        IntegrationFailure,
    };

    Kind kind;
    double time = 0.0;
    std::optional<Matrix> state;        // ConvergedToEquilibrium / IntegrationFailure
    std::optional<SignPattern> pattern; // SignStabilized
    std::optional<double> eta;          // EtaZ payloads
};

const char* to_string(Event::Kind kind);

/// Integration record. `states` holds the sampled matrices (Z for EtaZ, with
/// the scale in `etas`); `dissonance_series` holds the energy at each sample
/// (plain trace form on symmetric states, asymmetric form otherwise);
/// `neg_eigen_counts` holds per-sample negative-eigenvalue counts at zero
/// band 1e-7, absent (nullopt) when the state is not symmetric within 1e-8.
/// `events` ends with exactly one terminal event; a SignStabilized event, if
/// earned, precedes it.
struct Trajectory {
    ModelKind model = ModelKind::PureInfluence;
    std::vector<double> times;
    std::vector<Matrix> states;
    std::vector<double> etas;
    std::vector<double> dissonance_series;
    std::vector<std::optional<int>> neg_eigen_counts;
    std::vector<Event> events;

    const Event& terminal() const { return events.back(); }
    const Event* sign_stabilized() const;
};

/// Model field at a state; validates the model's state constraints
/// (zero diagonal within 1e-12 for the pure-influence family, unit
/// Frobenius norm within 1e-8 for the projected family).
Matrix rhs(ModelKind model, const Matrix& state);

/// EtaZ field: returns (eta_dot, z_dot).
std::pair<double, Matrix> rhs_etaz(const EtaZState& state);

/// Adaptive Dormand-Prince 4(5) integration with PI step control.
/// Projected states are renormalized to the sphere after every accepted
/// step. Terminal events: ConvergedToEquilibrium (||rhs|| < grad_tol on two
/// consecutive accepted steps), BlowUp (norm/eta above blowup_norm, or step
/// collapse below 1e-14 for the finite-escape models), BudgetExhausted
/// (t reached max_time), IntegrationFailure (step collapse for projected
/// models, which cannot escape). Sign stabilization is assessed at
/// termination over the trailing hold window and reported with the time the
/// final pattern was established. `record_at`, when given, forces exact-hit
/// samples at those times (ascending) in addition to stride sampling.
Trajectory integrate(ModelKind model, const Matrix& initial, const IntegratorOptions& opts = {},
                     const std::vector<double>* record_at = nullptr);
Trajectory integrate(const EtaZState& initial, const IntegratorOptions& opts = {},
                     const std::vector<double>* record_at = nullptr);

/// Norm evolution along the stationary direction Z*:
/// eta(t) = eta0 / (1 + t eta0 d_star). For d_star < 0 the domain ends at
/// the escape time 1/(eta0 |d_star|); at/beyond it the call errors.
double eta_closed_form(double eta0, double d_star, double t);

/// Max over the first trajectory's samples of
/// ||X(t)/||X(t)|| - Z(tau(t))||_F with tau(t) the trapezoidal integral of
/// eta(s) = ||X(s)||_F, the time change under which the normalized
/// pure-influence flow follows the projected flow. `x_traj` must be a
/// PureInfluence run; `z_traj` supplies Z(.) either directly (a
/// ProjectedPureInfluence run) or through its own time change (an EtaZ
/// run). Errors when the initial directions disagree.
double check_time_reparam(const Trajectory& x_traj, const Trajectory& z_traj);

/// CSV with columns t[, eta], z_11..z_nn (row-major), dissonance,
/// neg_eigen_count (empty cell when absent). `metadata`, when nonempty, is
/// written first as a '#' comment line.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::string& metadata = {});

/// Events sidecar: array of {"event", "time", "payload"} objects.
nlohmann::json events_to_json(const Trajectory& traj);

}  // namespace balanceflow
