#include "balanceflow/dynamics.hpp"

#include "balanceflow/balance.hpp"
#include "balanceflow/dissonance.hpp"
#include "balanceflow/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace balanceflow {

const char* to_string(ModelKind model) {
    switch (model) {
        case ModelKind::PureInfluence: return "pure";
        case ModelKind::Kulakowski: return "kulakowski";
        case ModelKind::ProjectedPureInfluence: return "projected-pure";
        case ModelKind::ProjectedKulakowski: return "projected-kulakowski";
        case ModelKind::EtaZ: return "etaz";
    }
    return "?";
}

std::optional<ModelKind> model_from_string(const std::string& name) {
    if (name == "pure") return ModelKind::PureInfluence;
    if (name == "kulakowski") return ModelKind::Kulakowski;
    if (name == "projected-pure") return ModelKind::ProjectedPureInfluence;
    if (name == "projected-kulakowski") return ModelKind::ProjectedKulakowski;
    if (name == "etaz") return ModelKind::EtaZ;
    return std::nullopt;
}

const char* to_string(Event::Kind kind) {
    switch (kind) {
        case Event::Kind::ConvergedToEquilibrium: return "ConvergedToEquilibrium";
        case Event::Kind::BlowUp: return "BlowUp";
        case Event::Kind::SignStabilized: return "SignStabilized";
        case Event::Kind::BudgetExhausted: return "BudgetExhausted";
        case Event::Kind::IntegrationFailure: return "IntegrationFailure";
    }
    return "?";
}

const Event* Trajectory::sign_stabilized() const {
    for (const Event& e : events)
        if (e.kind == Event::Kind::SignStabilized) return &e;
    return nullptr;
}

namespace {

using Vec = Eigen::VectorXd;

constexpr double kMinStep = 1e-14;
constexpr double kSymDefect = 1e-8;   // trace form / eigen counts need this much symmetry
constexpr double kEigenBand = 1e-7;
constexpr double kPatternTol = 1e-7;

bool is_projected(ModelKind m) {
    return m == ModelKind::ProjectedPureInfluence || m == ModelKind::ProjectedKulakowski;
}

bool zero_diag_model(ModelKind m) {
    return m == ModelKind::PureInfluence || m == ModelKind::ProjectedPureInfluence ||
           m == ModelKind::EtaZ;
}

// Model field on the flattened state (column-major n x n block, eta appended
// for EtaZ). No constraint checks here; the driver keeps the invariants.
struct Field {
    ModelKind model;
    int n;

    int dim() const { return model == ModelKind::EtaZ ? n * n + 1 : n * n; }

    void operator()(const Vec& y, Vec& dy) const {
        Eigen::Map<const Matrix> z(y.data(), n, n);
        Eigen::Map<Matrix> out(dy.data(), n, n);
        switch (model) {
            case ModelKind::PureInfluence:
                out.noalias() = z * z;
                out.diagonal().setZero();
                break;
            case ModelKind::Kulakowski:
                out.noalias() = z * z;
                break;
            case ModelKind::ProjectedPureInfluence: {
                Matrix sq = z * z;
                const double d = -(sq.array() * z.array()).sum();
                out = sq + d * z;
                out.diagonal().setZero();
                break;
            }
            case ModelKind::ProjectedKulakowski: {
                Matrix sq = z * z;
                const double d = -(sq.array() * z.array()).sum();
                out = sq + d * z;
                break;
            }
            case ModelKind::EtaZ: {
                Matrix sq = z * z;
                const double d = -(sq.array() * z.array()).sum();
                const double eta = y(n * n);
                out = eta * (sq + d * z);
                out.diagonal().setZero();
                dy(n * n) = -d * eta * eta;
                break;
            }
        }
    }
};

Vec flatten(const Matrix& m) {
    Vec y(m.size());
    Eigen::Map<Matrix>(y.data(), m.rows(), m.cols()) = m;
    return y;
}

Matrix unflatten(const Vec& y, int n) {
    return Eigen::Map<const Matrix>(y.data(), n, n);
}

double scaled_rms(const Vec& v, const Vec& sk) {
    return std::sqrt((v.array() / sk.array()).square().mean());
}

// Starting step along the lines of the classic d0/d1/d2 heuristic; capped
// near equilibria so a stationary start converges at t ~ 0, not max_time.
double initial_step(const Field& f, const Vec& y0, const Vec& f0, const IntegratorOptions& o) {
    const Vec sk = (o.abs_tol + o.rel_tol * y0.array().abs()).matrix();
    const double d0 = scaled_rms(y0, sk);
    const double d1 = scaled_rms(f0, sk);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, o.max_time);
    Vec f1(f0.size());
    f(y0 + h0 * f0, f1);
    const double d2 = scaled_rms(f1 - f0, sk) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    double h = std::min({100.0 * h0, h1, o.max_time});
    if (f0.norm() < o.grad_tol) h = std::min(h, 1e-3);
    // Unresolvable tolerances overflow the scaled norms into NaN; a NaN step
    // would dodge every comparison, so collapse it and let the stepper fail.
    if (!std::isfinite(h)) h = kMinStep;
    return h;
}

// Dormand-Prince 4(5) pair.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI step control constants.
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - 0.75 * kBeta;
constexpr double kSafe = 0.9;

struct Runner {
    ModelKind model;
    int n;
    IntegratorOptions opts;
    const std::vector<double>* record_at = nullptr;

    Field f{};
    Trajectory traj;
    std::size_t next_rec = 0;
    std::optional<SignPattern> pattern;
    double last_change = 0.0;

    bool etaz() const { return model == ModelKind::EtaZ; }
    // Only the projected models live on a compact set; for the rest a
    // collapsing step means the solution is leaving every bounded set.
    bool escapes() const { return !is_projected(model); }

    void renormalize(Vec& y) const {
        if (is_projected(model)) {
            const double s = y.norm();
            if (s > 0) y /= s;
        } else if (etaz()) {
            auto z = y.head(n * n);
            const double s = z.norm();
            if (s > 0) z /= s;
        }
    }

    double magnitude(const Vec& y) const { return etaz() ? y(n * n) : y.norm(); }

    void record(double t, const Vec& y) {
        if (!traj.times.empty() && t <= traj.times.back()) return;
        Matrix m = unflatten(y, n);
        traj.times.push_back(t);
        traj.states.push_back(m);
        if (etaz()) traj.etas.push_back(y(n * n));
        if (symmetry_defect(m) <= kSymDefect) {
            traj.dissonance_series.push_back(dissonance(m));
            traj.neg_eigen_counts.push_back(count_eigen_signs(m, kEigenBand).neg);
        } else {
            traj.dissonance_series.push_back(dissonance_asym(m));
            traj.neg_eigen_counts.push_back(std::nullopt);
        }
    }

    void update_pattern(double t, const Vec& y) {
        SignPattern p = sign_pattern(unflatten(y, n), kPatternTol);
        if (!pattern || p != *pattern) {
            pattern = std::move(p);
            last_change = t;
        }
    }

    void skip_stale_records(double t) {
        while (record_at && next_rec < record_at->size() && (*record_at)[next_rec] <= t)
            ++next_rec;
    }

    Trajectory finish(Event::Kind kind, double t, const Vec& y) {
        record(t, y);
        const double window = is_projected(model) ? opts.sign_window : 0.1 * t;
        const bool held = pattern && t - last_change >= window;
        if (pattern && (kind == Event::Kind::ConvergedToEquilibrium || held)) {
            Event se{};
            se.kind = Event::Kind::SignStabilized;
            se.time = last_change;
            se.pattern = pattern;
            traj.events.push_back(std::move(se));
        }
        Event te{};
        te.kind = kind;
        te.time = t;
        if (kind == Event::Kind::ConvergedToEquilibrium || kind == Event::Kind::IntegrationFailure)
            te.state = unflatten(y, n);
        if (etaz()) te.eta = y(n * n);
        traj.events.push_back(std::move(te));
        return std::move(traj);
    }

    Trajectory run(Vec y) {
        traj.model = model;
        f = Field{model, n};
        const int dim = f.dim();
        Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
        Vec ytmp(dim), ynew(dim), yerr(dim);

        double t = 0.0;
        renormalize(y);
        f(y, k1);
        record(t, y);
        update_pattern(t, y);
        skip_stale_records(t);
        int eq_streak = k1.norm() < opts.grad_tol ? 1 : 0;
        if (magnitude(y) > opts.blowup_norm) return finish(Event::Kind::BlowUp, t, y);

        double h = initial_step(f, y, k1, opts);
        double facold = 1e-4;
        bool rejected = false;

        for (;;) {
            if (h < kMinStep)
                return finish(escapes() ? Event::Kind::BlowUp : Event::Kind::IntegrationFailure, t,
                              y);

            // Land exactly on the next forced sample or the time budget.
            double bound = opts.max_time;
            bool rec_hit = false;
            if (record_at && next_rec < record_at->size() &&
                (*record_at)[next_rec] <= bound) {
                bound = (*record_at)[next_rec];
                rec_hit = true;
            }
            double h_eff = h;
            bool pinned = false;
            if (t + h_eff >= bound) {
                h_eff = bound - t;
                pinned = true;
                if (h_eff < kMinStep) {
                    if (rec_hit) {
                        record(bound, y);
                        ++next_rec;
                        continue;
                    }
                    return finish(Event::Kind::BudgetExhausted, opts.max_time, y);
                }
            }

            // Near an equilibrium the deviation falls below the user error
            // scale and the controller stops resolving it, parking the state
            // ~(abs_tol + rel_tol*|y|) away from the fixed point, where
            // ||rhs|| can exceed grad_tol forever. Capping the scale by the
            // current residual norm keeps contraction alive down to the
            // grad_tol detection band (floored so roundoff cannot stall h).
            const double sk_cap =
                std::max(0.1 * k1.norm(), 0.01 * opts.grad_tol);

            ytmp = y + h_eff * (a21 * k1);
            f(ytmp, k2);
            ytmp = y + h_eff * (a31 * k1 + a32 * k2);
            f(ytmp, k3);
            ytmp = y + h_eff * (a41 * k1 + a42 * k2 + a43 * k3);
            f(ytmp, k4);
            ytmp = y + h_eff * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(ytmp, k5);
            ytmp = y + h_eff * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(ytmp, k6);
            ynew = y + h_eff * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            f(ynew, k7);
            yerr = h_eff * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double acc = 0.0;
            for (Eigen::Index i = 0; i < yerr.size(); ++i) {
                const double sk = std::min(
                    sk_cap,
                    opts.abs_tol + opts.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i))));
                const double q = yerr(i) / sk;
                acc += q * q;
            }
            const double err = std::sqrt(acc / double(dim));

            if (!std::isfinite(err)) {
                h = h_eff * 0.1;
                rejected = true;
                continue;
            }
            const double fac11 = std::pow(err, kExpo1);
            if (err > 1.0) {
                h = h_eff / std::min(5.0, fac11 / kSafe);
                rejected = true;
                continue;
            }

            double fac = fac11 / std::pow(facold, kBeta);
            fac = std::clamp(fac / kSafe, 0.1, 5.0);
            double hnew = h_eff / fac;
            if (rejected) hnew = std::min(hnew, h_eff);
            rejected = false;
            facold = std::max(err, 1e-4);

            t = pinned ? bound : t + h_eff;
            y.swap(ynew);
            if (is_projected(model) || etaz()) {
                renormalize(y);
                f(y, k1);  // field at the state actually kept
            } else {
                k1.swap(k7);
            }

            update_pattern(t, y);
            if (pinned && rec_hit) {
                record(t, y);
                skip_stale_records(t);
            } else if (t - traj.times.back() >= opts.sample_stride) {
                record(t, y);
            }

            eq_streak = k1.norm() < opts.grad_tol ? eq_streak + 1 : 0;
            if (eq_streak >= 2) return finish(Event::Kind::ConvergedToEquilibrium, t, y);
            if (magnitude(y) > opts.blowup_norm) return finish(Event::Kind::BlowUp, t, y);
            if (t >= opts.max_time) return finish(Event::Kind::BudgetExhausted, t, y);

            h = std::min(hnew, opts.max_time);
        }
    }
};

void validate_options(const IntegratorOptions& o) {
    const double fields[] = {o.rel_tol,  o.abs_tol,     o.max_time,     o.blowup_norm,
                             o.grad_tol, o.sign_window, o.sample_stride};
    for (double v : fields)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("integrator options must be positive and finite");
}

void validate_record_at(const std::vector<double>* record_at) {
    if (!record_at) return;
    for (std::size_t i = 1; i < record_at->size(); ++i)
        if ((*record_at)[i] < (*record_at)[i - 1])
            throw std::invalid_argument("record times must be ascending");
}

Matrix checked_state(ModelKind model, const Matrix& state) {
    if (state.rows() != state.cols() || state.rows() < 1)
        throw std::invalid_argument("state must be a square matrix");
    if (!state.allFinite()) throw std::invalid_argument("state entries must be finite");
    Matrix x = state;
    if (zero_diag_model(model)) {
        if (x.diagonal().cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("state diagonal must vanish");
        x.diagonal().setZero();
    }
    if (is_projected(model)) {
        const double s = x.norm();
        if (std::abs(s - 1.0) > 1e-8)
            throw std::invalid_argument("projected state must have unit Frobenius norm");
        x /= s;
    }
    return x;
}

}  // namespace

Matrix rhs(ModelKind model, const Matrix& state) {
    if (model == ModelKind::EtaZ)
        throw std::invalid_argument("the polar transcription takes an EtaZState");
    Matrix x = checked_state(model, state);
    const int n = int(x.rows());
    Field f{model, n};
    Vec dy(f.dim());
    f(flatten(x), dy);
    return unflatten(dy, n);
}

std::pair<double, Matrix> rhs_etaz(const EtaZState& state) {
    const int n = state.z.n();
    Field f{ModelKind::EtaZ, n};
    Vec y(f.dim()), dy(f.dim());
    y.head(n * n) = flatten(state.z.matrix());
    y(n * n) = state.eta;
    f(y, dy);
    return {dy(n * n), unflatten(dy, n)};
}

Trajectory integrate(ModelKind model, const Matrix& initial, const IntegratorOptions& opts,
                     const std::vector<double>* record_at) {
    if (model == ModelKind::EtaZ)
        throw std::invalid_argument("the polar transcription takes an EtaZState");
    validate_options(opts);
    validate_record_at(record_at);
    Matrix x = checked_state(model, initial);
    Runner r;
    r.model = model;
    r.n = int(x.rows());
    r.opts = opts;
    r.record_at = record_at;
    return r.run(flatten(x));
}

Trajectory integrate(const EtaZState& initial, const IntegratorOptions& opts,
                     const std::vector<double>* record_at) {
    validate_options(opts);
    validate_record_at(record_at);
    const int n = initial.z.n();
    Vec y(n * n + 1);
    y.head(n * n) = flatten(initial.z.matrix());
    y(n * n) = initial.eta;
    Runner r;
    r.model = ModelKind::EtaZ;
    r.n = n;
    r.opts = opts;
    r.record_at = record_at;
    return r.run(std::move(y));
}

double eta_closed_form(double eta0, double d_star, double t) {
    if (!(eta0 > 0.0) || !std::isfinite(eta0) || !std::isfinite(d_star))
        throw std::invalid_argument("eta0 must be positive and d_star finite");
    if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
    const double denom = 1.0 + t * eta0 * d_star;
    if (denom <= 0.0)
        throw std::domain_error("time at or beyond the escape time 1/(eta0 |d_star|)");
    return eta0 / denom;
}

namespace {

std::vector<double> trapezoid_clock(const std::vector<double>& ts, const std::vector<double>& etas) {
    std::vector<double> tau(ts.size(), 0.0);
    for (std::size_t i = 1; i < ts.size(); ++i)
        tau[i] = tau[i - 1] + 0.5 * (etas[i] + etas[i - 1]) * (ts[i] - ts[i - 1]);
    return tau;
}

// Map a clock value u back to integration time, linearly within segments.
double invert_clock(const std::vector<double>& tau, const std::vector<double>& ts, double u) {
    if (u <= tau.front()) return ts.front();
    if (u >= tau.back()) return ts.back();
    const auto it = std::upper_bound(tau.begin(), tau.end(), u);
    const std::size_t j = std::size_t(it - tau.begin());
    const double span = tau[j] - tau[j - 1];
    if (span <= 0.0) return ts[j];
    const double w = (u - tau[j - 1]) / span;
    return ts[j - 1] + w * (ts[j] - ts[j - 1]);
}

// Sphere samples: blend linearly, then pull back to the sphere. Beyond the
// recorded horizon the trajectory is held at its final state.
Matrix interp_sphere(const std::vector<double>& ts, const std::vector<Matrix>& xs, double s) {
    if (s <= ts.front()) return xs.front();
    if (s >= ts.back()) return xs.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), s);
    const std::size_t j = std::size_t(it - ts.begin());
    const double w = (s - ts[j - 1]) / (ts[j] - ts[j - 1]);
    Matrix b = (1.0 - w) * xs[j - 1] + w * xs[j];
    const double norm = b.norm();
    return norm > 0.0 ? Matrix(b / norm) : xs[j - 1];
}

}  // namespace

double check_time_reparam(const Trajectory& x_traj, const Trajectory& z_traj) {
    if (x_traj.model != ModelKind::PureInfluence)
        throw std::invalid_argument("first trajectory must be the unprojected flow");
    const bool via_eta = z_traj.model == ModelKind::EtaZ;
    if (!via_eta && z_traj.model != ModelKind::ProjectedPureInfluence)
        throw std::invalid_argument("second trajectory must supply the spherical flow");
    if (x_traj.states.empty() || z_traj.states.empty())
        throw std::invalid_argument("empty trajectory");
    if (x_traj.states.front().rows() != z_traj.states.front().rows())
        throw std::invalid_argument("dimension mismatch");

    const std::size_t m = x_traj.times.size();
    std::vector<double> eta_x(m);
    for (std::size_t i = 0; i < m; ++i) eta_x[i] = x_traj.states[i].norm();
    if ((x_traj.states.front() / eta_x.front() - z_traj.states.front()).norm() > 1e-9)
        throw std::invalid_argument("initial directions disagree");

    const std::vector<double> tau_x = trapezoid_clock(x_traj.times, eta_x);
    std::vector<double> tau_z;
    if (via_eta) tau_z = trapezoid_clock(z_traj.times, z_traj.etas);

    double dev = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = via_eta ? invert_clock(tau_z, z_traj.times, tau_x[i]) : tau_x[i];
        const Matrix zi = interp_sphere(z_traj.times, z_traj.states, s);
        dev = std::max(dev, (x_traj.states[i] / eta_x[i] - zi).norm());
    }
    return dev;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::string& metadata) {
    if (!metadata.empty()) out << "# " << metadata << "\n";
    const bool with_eta = !traj.etas.empty();
    const int n = traj.states.empty() ? 0 : int(traj.states.front().rows());
    out << "t";
    if (with_eta) out << ",eta";
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) out << ",z_" << i << j;
    out << ",dissonance,neg_eigen_count\n";
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << format_double(traj.times[r]);
        if (with_eta) out << ',' << format_double(traj.etas[r]);
        const Matrix& m = traj.states[r];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out << ',' << format_double(m(i, j));
        out << ',' << format_double(traj.dissonance_series[r]) << ',';
        if (traj.neg_eigen_counts[r]) out << *traj.neg_eigen_counts[r];
        out << '\n';
    }
}

nlohmann::json events_to_json(const Trajectory& traj) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Event& e : traj.events) {
        nlohmann::json payload = nlohmann::json::object();
        if (e.kind == Event::Kind::BlowUp) payload["t_escape"] = e.time;
        if (e.state) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index i = 0; i < e.state->rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index j = 0; j < e.state->cols(); ++j) row.push_back((*e.state)(i, j));
                rows.push_back(std::move(row));
            }
            payload["state"] = std::move(rows);
        }
        if (e.pattern) {
            nlohmann::json rows = nlohmann::json::array();
            const auto& s = e.pattern->signs();
            for (Eigen::Index i = 0; i < s.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index j = 0; j < s.cols(); ++j) row.push_back(int(s(i, j)));
                rows.push_back(std::move(row));
            }
            payload["pattern"] = std::move(rows);
        }
        if (e.eta) payload["eta"] = *e.eta;
        arr.push_back({{"event", to_string(e.kind)}, {"time", e.time}, {"payload", payload}});
    }
    return arr;
}

}  // namespace balanceflow
