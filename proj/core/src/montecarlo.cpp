#include "balanceflow/montecarlo.hpp"

#include "balanceflow/dissonance.hpp"
#include "balanceflow/matrix_io.hpp"
#include "balanceflow/scale_symmetric.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace balanceflow {

const char* to_string(Family family) {
    switch (family) {
        case Family::GenericAsymmetric: return "asymmetric";
        case Family::GenericSymmetric: return "symmetric";
        case Family::KulakowskiGeneric: return "kulakowski";
    }
    return "?";
}

std::optional<Family> family_from_string(const std::string& name) {
    if (name == "asymmetric") return Family::GenericAsymmetric;
    if (name == "symmetric") return Family::GenericSymmetric;
    if (name == "kulakowski") return Family::KulakowskiGeneric;
    return std::nullopt;
}

const char* to_string(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::BalancedFinite: return "BalancedFinite";
        case OutcomeKind::BalancedComponentsFinite: return "BalancedComponentsFinite";
        case OutcomeKind::ConvergedUnbalanced: return "ConvergedUnbalanced";
        case OutcomeKind::NoDecision: return "NoDecision";
    }
    return "?";
}

int chernoff_n(double epsilon, double eta_conf) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0) || !(eta_conf > 0.0) || !(eta_conf < 1.0))
        throw std::invalid_argument("Chernoff parameters must lie in (0,1)");
    const double bound = std::log(2.0 / eta_conf) / (2.0 * epsilon * epsilon);
    return static_cast<int>(std::ceil(bound));
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

// Fixed mapping to [0,1): top 53 bits of the generator word. Keeps the
// stream identical across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double entry_uniform(std::mt19937_64& rng) { return -100.0 + 200.0 * unit_uniform(rng); }

}  // namespace

Matrix gen_initial(Family family, int n, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("initial-condition families need n >= 3");
    std::mt19937_64 rng(seed);
    Matrix x = Matrix::Zero(n, n);
    switch (family) {
        case Family::GenericSymmetric:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) x(i, j) = x(j, i) = entry_uniform(rng);
            break;
        case Family::GenericAsymmetric:
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) x(i, j) = entry_uniform(rng);
            break;
        case Family::KulakowskiGeneric: {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) x(i, j) = entry_uniform(rng);
            x /= x.norm();
            break;
        }
    }
    return x;
}

IntegratorOptions montecarlo_options() {
    IntegratorOptions o;
    o.sample_stride = o.max_time;
    return o;
}

namespace {

Matrix off_diagonal_part(const Matrix& m) {
    Matrix off = m;
    off.diagonal().setZero();
    return off;
}

// Eigen census plus the scale-symmetry metadata of a terminal state.
void terminal_metadata(const Matrix& state, TrialOutcome& out) {
    const Matrix off = off_diagonal_part(state);
    std::optional<ScaleWitness> witness;
    try {
        witness = find_witness(AppraisalMatrix(off));
    } catch (const std::exception&) {
        witness.reset();  // non-finite entries cannot be witnessed
    }
    out.witness_present = witness.has_value();
    if (symmetry_defect(state) <= 1e-8) {
        out.eigen_counts = count_eigen_signs(state);
    } else if (witness) {
        Matrix sim = symmetrizing_similarity(AppraisalMatrix(off), *witness);
        sim = 0.5 * (sim + sim.transpose().eval());
        out.eigen_counts = count_eigen_signs(sim);
    }
    if (out.eigen_counts) out.one_positive_eigen = out.eigen_counts->pos == 1;
}

}  // namespace

TrialOutcome classify_outcome(const Trajectory& traj, double zero_tol) {
    if (traj.events.empty()) throw std::invalid_argument("trajectory has no terminal event");
    TrialOutcome out;
    const Event& terminal = traj.terminal();
    const Matrix& state = traj.states.back();
    out.terminal_time = traj.times.back();
    out.terminal_dissonance = traj.dissonance_series.back();
    if (state.allFinite()) terminal_metadata(state, out);

    // A numerical breakdown taints whatever pattern was seen before it.
    if (terminal.kind == Event::Kind::IntegrationFailure) {
        out.kind = OutcomeKind::NoDecision;
        out.summary = "integration-failure";
        return out;
    }

    // A pattern that held for the stability window decides the trial even
    // when the run later hit the time budget without meeting grad_tol.
    const Event* stabilized = traj.sign_stabilized();
    if (!stabilized) {
        out.kind = OutcomeKind::NoDecision;
        out.summary = terminal.kind == Event::Kind::BudgetExhausted ? "budget-exhausted"
                                                                    : "no-stable-pattern";
        return out;
    }

    const BalanceVerdict verdict = faction_partition(*stabilized->pattern);
    switch (verdict.kind) {
        case BalanceVerdict::Kind::BalancedOneFaction:
        case BalanceVerdict::Kind::BalancedTwoFactions:
            out.kind = OutcomeKind::BalancedFinite;
            out.t_sign = stabilized->time;
            return out;
        case BalanceVerdict::Kind::BalancedComponents:
            out.kind = OutcomeKind::BalancedComponentsFinite;
            out.t_sign = stabilized->time;
            return out;
        default:
            break;
    }
    out.kind = OutcomeKind::ConvergedUnbalanced;
    const bool self_loops_only =
        off_diagonal_part(state).cwiseAbs().maxCoeff() <= zero_tol &&
        state.diagonal().cwiseAbs().maxCoeff() > zero_tol;
    if (self_loops_only)
        out.summary = "self-loops-only";
    else if (verdict.kind == BalanceVerdict::Kind::Incomplete)
        out.summary = "incomplete-pattern";
    else
        out.summary = "unbalanced-pattern";
    if (terminal.kind == Event::Kind::BlowUp) out.summary += "-escape";
    return out;
}

namespace {

TrialRow run_trial(ModelKind model, Family family, int n, std::uint64_t seed,
                   const IntegratorOptions& options, double zero_tol) {
    const Matrix x0 = gen_initial(family, n, seed);
    Trajectory traj;
    switch (model) {
        case ModelKind::PureInfluence:
        case ModelKind::Kulakowski:
            traj = integrate(model, x0, options);
            break;
        case ModelKind::ProjectedPureInfluence:
        case ModelKind::ProjectedKulakowski:
            traj = integrate(model, Matrix(x0 / x0.norm()), options);
            break;
        case ModelKind::EtaZ:
            traj = integrate(normalize_to_sphere(AppraisalMatrix(x0)), options);
            break;
    }
    return TrialRow{seed, classify_outcome(traj, zero_tol)};
}

}  // namespace

MonteCarloReport run_experiment(ModelKind model, Family family, int n, int trials,
                                std::uint64_t master_seed, const IntegratorOptions& options,
                                int workers, double zero_tol) {
    const bool kulakowski_model =
        model == ModelKind::Kulakowski || model == ModelKind::ProjectedKulakowski;
    if (kulakowski_model != (family == Family::KulakowskiGeneric))
        throw std::invalid_argument("model/family mismatch");
    if (trials < 1) throw std::invalid_argument("trial count must be positive");
    if (!(zero_tol > 0.0)) throw std::invalid_argument("zero tolerance must be positive");

    const auto start = std::chrono::steady_clock::now();
    MonteCarloReport report;
    report.model = model;
    report.family = family;
    report.n = n;
    report.trials = trials;
    report.master_seed = master_seed;
    report.options = options;
    report.zero_tol = zero_tol;
    report.rows.resize(trials);

    int pool = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    pool = std::max(1, std::min(pool, trials));
    if (pool == 1) {
        for (int i = 0; i < trials; ++i)
            report.rows[i] =
                run_trial(model, family, n, trial_seed(master_seed, i), options, zero_tol);
    } else {
        // Trials are claimed by index; rows land in seed order, so the
        // aggregate never depends on scheduling.
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (int w = 0; w < pool; ++w)
            threads.emplace_back([&] {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= trials) return;
                    try {
                        report.rows[i] = run_trial(model, family, n, trial_seed(master_seed, i),
                                                   options, zero_tol);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (const TrialRow& row : report.rows)
        ++report.counts[static_cast<std::size_t>(row.outcome.kind)];
    report.p_hat = double(report.count(OutcomeKind::BalancedFinite)) / double(trials);
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::json report_to_json(const MonteCarloReport& report, bool include_runtime) {
    nlohmann::json j;
    j["model"] = to_string(report.model);
    j["family"] = to_string(report.family);
    j["n"] = report.n;
    j["trials"] = report.trials;
    j["master_seed"] = report.master_seed;
    j["counts"] = {
        {"balanced_finite", report.count(OutcomeKind::BalancedFinite)},
        {"balanced_components_finite", report.count(OutcomeKind::BalancedComponentsFinite)},
        {"converged_unbalanced", report.count(OutcomeKind::ConvergedUnbalanced)},
        {"no_decision", report.count(OutcomeKind::NoDecision)},
    };
    j["p_hat"] = report.p_hat;
    if (report.epsilon) j["epsilon"] = *report.epsilon;
    if (report.eta_conf) j["eta_conf"] = *report.eta_conf;
    j["integrator"] = {
        {"rel_tol", report.options.rel_tol},     {"abs_tol", report.options.abs_tol},
        {"max_time", report.options.max_time},   {"blowup_norm", report.options.blowup_norm},
        {"grad_tol", report.options.grad_tol},   {"sign_window", report.options.sign_window},
        {"sample_stride", report.options.sample_stride},
    };
    j["zero_tol"] = report.zero_tol;
    if (include_runtime) j["runtime_seconds"] = report.runtime_seconds;
    return j;
}

void write_trials_csv(std::ostream& out, const MonteCarloReport& report) {
    out << "trial,seed,outcome,t_sign,terminal_time,terminal_dissonance,"
           "eigen_pos,eigen_zero,eigen_neg,witness_present,one_positive_eigen\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const TrialRow& row = report.rows[i];
        const TrialOutcome& o = row.outcome;
        out << i << ',' << row.seed << ',' << to_string(o.kind) << ',';
        if (o.t_sign) out << format_double(*o.t_sign);
        out << ',' << format_double(o.terminal_time) << ','
            << format_double(o.terminal_dissonance) << ',';
        if (o.eigen_counts)
            out << o.eigen_counts->pos << ',' << o.eigen_counts->zero << ','
                << o.eigen_counts->neg;
        else
            out << ",,";
        out << ',' << (o.witness_present ? 1 : 0) << ',';
        if (o.one_positive_eigen) out << (*o.one_positive_eigen ? 1 : 0);
        out << '\n';
    }
}

}  // namespace balanceflow
