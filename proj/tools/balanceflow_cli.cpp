// Command-line front end: simulate trajectories, classify matrices, build
// and certify equilibria, run Monte Carlo batches, and sample the n = 3
// energy landscape.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric failure.
// Relative output paths are resolved against $BALANCEFLOW_OUT when set.

#include "balanceflow/balance.hpp"
#include "balanceflow/dissonance.hpp"
#include "balanceflow/dynamics.hpp"
#include "balanceflow/equilibria.hpp"
#include "balanceflow/landscape.hpp"
#include "balanceflow/matrix_io.hpp"
#include "balanceflow/montecarlo.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace balanceflow;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolve_output(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    if (const char* dir = std::getenv("BALANCEFLOW_OUT"); dir && *dir) {
        std::string base(dir);
        if (base.back() != '/') base += '/';
        return base + path;
    }
    return path;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    return out;
}

// Writes to the resolved path, or stdout when the path is empty.
void emit_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    const std::string resolved = resolve_output(path);
    auto out = open_output(resolved);
    out << text;
    if (!out.good()) throw IoError(resolved + ": write failed");
}

ModelKind parse_model(const std::string& name) {
    if (auto m = model_from_string(name)) return *m;
    throw UsageError("unknown model '" + name + "' (pure, kulakowski, projected-pure, "
                     "projected-kulakowski, etaz)");
}

Family parse_family(const std::string& name) {
    if (auto f = family_from_string(name)) return *f;
    throw UsageError("unknown family '" + name + "' (symmetric, asymmetric, kulakowski)");
}

void check_model_family(ModelKind model, Family family) {
    const bool km = model == ModelKind::Kulakowski || model == ModelKind::ProjectedKulakowski;
    if (km != (family == Family::KulakowskiGeneric))
        throw UsageError("model/family mismatch: the Kulakowski models pair with --family "
                         "kulakowski, the pure-influence models with symmetric/asymmetric");
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw UsageError(std::string("cannot parse ") + what + " entry '" + cell + "'");
        }
    }
    if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
    return out;
}

struct IntegratorFlags {
    IntegratorOptions opts;

    void attach(CLI::App* cmd) {
        cmd->add_option("--rel-tol", opts.rel_tol, "Relative step tolerance");
        cmd->add_option("--abs-tol", opts.abs_tol, "Absolute step tolerance");
        cmd->add_option("--max-time", opts.max_time, "Integration time budget");
        cmd->add_option("--blowup-norm", opts.blowup_norm, "Escape threshold on the state norm");
        cmd->add_option("--grad-tol", opts.grad_tol, "Equilibrium detection threshold");
        cmd->add_option("--sign-window", opts.sign_window,
                        "Trailing window for sign stabilization (projected models)");
        cmd->add_option("--sample-stride", opts.sample_stride, "Minimum time between samples");
    }

    std::string echo() const {
        std::string s;
        s += " rel_tol=" + format_double(opts.rel_tol);
        s += " abs_tol=" + format_double(opts.abs_tol);
        s += " max_time=" + format_double(opts.max_time);
        s += " blowup_norm=" + format_double(opts.blowup_norm);
        s += " grad_tol=" + format_double(opts.grad_tol);
        s += " sign_window=" + format_double(opts.sign_window);
        s += " sample_stride=" + format_double(opts.sample_stride);
        return s;
    }

    json echo_json() const {
        return {{"rel_tol", opts.rel_tol},         {"abs_tol", opts.abs_tol},
                {"max_time", opts.max_time},       {"blowup_norm", opts.blowup_norm},
                {"grad_tol", opts.grad_tol},       {"sign_window", opts.sign_window},
                {"sample_stride", opts.sample_stride}};
    }
};

// ---------------------------------------------------------------- simulate

struct SimulateConfig {
    std::string model_name;
    std::string input;
    std::string family_name;
    int n = 0;
    std::uint64_t seed = 0;
    std::string output = "trajectory";
    std::string format = "csv";
    IntegratorFlags integ;
    bool have_family = false;
    bool have_n = false;
    bool have_seed = false;
};

json trajectory_to_json(const Trajectory& traj) {
    json j;
    j["times"] = traj.times;
    if (!traj.etas.empty()) j["eta"] = traj.etas;
    auto& states = j["states"] = json::array();
    for (const Matrix& m : traj.states) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
            rows.push_back(std::move(row));
        }
        states.push_back(std::move(rows));
    }
    j["dissonance"] = traj.dissonance_series;
    auto& negs = j["neg_eigen_count"] = json::array();
    for (const auto& c : traj.neg_eigen_counts) {
        if (c)
            negs.push_back(*c);
        else
            negs.push_back(nullptr);
    }
    j["events"] = events_to_json(traj);
    return j;
}

int cmd_simulate(const SimulateConfig& cfg) {
    const ModelKind model = parse_model(cfg.model_name);

    const bool generated = cfg.have_family || cfg.have_n || cfg.have_seed;
    if (cfg.input.empty() == !generated)
        throw UsageError("provide exactly one input: --input FILE, or --family/--n/--seed");
    if (generated && !(cfg.have_family && cfg.have_n && cfg.have_seed))
        throw UsageError("--family, --n and --seed must be given together");

    Matrix x0;
    std::string source;
    if (generated) {
        const Family family = parse_family(cfg.family_name);
        check_model_family(model, family);
        x0 = gen_initial(family, cfg.n, cfg.seed);
        source = std::string("family=") + to_string(family) + " n=" + std::to_string(cfg.n) +
                 " seed=" + std::to_string(cfg.seed);
    } else {
        x0 = read_matrix_file(cfg.input);
        source = "input=" + cfg.input;
    }

    Trajectory traj;
    switch (model) {
        case ModelKind::ProjectedPureInfluence:
        case ModelKind::ProjectedKulakowski: {
            const double norm = x0.norm();
            if (generated) x0 /= norm;  // generators hand back raw scales
            traj = integrate(model, x0, cfg.integ.opts);
            break;
        }
        case ModelKind::EtaZ:
            traj = integrate(normalize_to_sphere(AppraisalMatrix(x0)), cfg.integ.opts);
            break;
        default:
            traj = integrate(model, x0, cfg.integ.opts);
            break;
    }

    const std::string metadata =
        std::string("model=") + to_string(model) + " " + source + cfg.integ.echo();
    const std::string base = resolve_output(cfg.output);
    if (cfg.format == "json") {
        json j = trajectory_to_json(traj);
        j["metadata"] = {{"model", to_string(model)}, {"source", source},
                         {"integrator", cfg.integ.echo_json()}};
        auto out = open_output(base + ".json");
        out << j.dump(2) << '\n';
    } else {
        auto out = open_output(base + ".csv");
        write_trajectory_csv(out, traj, metadata);
        if (!out.good()) throw IoError(base + ".csv: write failed");
        json ev;
        ev["metadata"] = {{"model", to_string(model)}, {"source", source},
                          {"integrator", cfg.integ.echo_json()}};
        ev["events"] = events_to_json(traj);
        auto sidecar = open_output(base + ".events.json");
        sidecar << ev.dump(2) << '\n';
    }

    std::cerr << "terminal event: " << to_string(traj.terminal().kind)
              << " at t=" << format_double(traj.terminal().time) << "\n";
    return traj.terminal().kind == Event::Kind::IntegrationFailure ? kExitNumeric : kExitOk;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const std::string& input, double zero_tol, const std::string& output,
                 const std::string& format) {
    const Matrix m = read_matrix_file(input);
    const BalanceVerdict verdict = classify(m, zero_tol);
    if (format == "csv") {
        std::string row = "verdict,zero_tol\n";
        row += std::string(to_string(verdict.kind)) + "," + format_double(zero_tol) + "\n";
        emit_text(output, row);
    } else {
        json j = verdict_to_json(verdict);
        j["zero_tol"] = zero_tol;
        emit_text(output, j.dump(2) + "\n");
    }
    return kExitOk;
}

// --------------------------------------------------------------- equilibria

struct EquilibriaConfig {
    int n = 0;
    int k = 0;
    std::string signs;
    std::string angles;
    std::string frame_file;
    std::string blocks;
    std::string betas;
    bool check = false;
    std::string output;
    std::string format = "json";
    bool have_n = false;
    bool have_k = false;
};

NstMatrix frame_for(const EquilibriaConfig& cfg, int n, int k) {
    const int chosen = (!cfg.signs.empty() ? 1 : 0) + (!cfg.angles.empty() ? 1 : 0) +
                       (!cfg.frame_file.empty() ? 1 : 0);
    if (chosen > 1) throw UsageError("--s, --angles and --v are mutually exclusive");
    if (!cfg.signs.empty()) {
        if (k != 1) throw UsageError("--s parameterizes k = 1 frames only");
        std::vector<int> s;
        for (char c : cfg.signs) {
            if (c == '+')
                s.push_back(1);
            else if (c == '-')
                s.push_back(-1);
            else
                throw UsageError("--s must be a string over {+,-}");
        }
        if (static_cast<int>(s.size()) != n) throw UsageError("--s must have length n");
        return nst_k1(n, s);
    }
    if (!cfg.angles.empty()) {
        if (k != 2) throw UsageError("--angles parameterizes k = 2 frames only");
        return nst_k2(n, parse_double_list(cfg.angles, "--angles"));
    }
    if (!cfg.frame_file.empty()) return NstMatrix(n, k, read_table_file(cfg.frame_file));
    return nst_harmonic(n, k);
}

int cmd_equilibria(const EquilibriaConfig& cfg) {
    std::vector<BlockInput> blocks;
    if (!cfg.blocks.empty()) {
        if (cfg.have_n || cfg.have_k)
            throw UsageError("--blocks replaces --n/--k");
        if (!cfg.signs.empty() || !cfg.angles.empty() || !cfg.frame_file.empty())
            throw UsageError("--blocks uses default frames; --s/--angles/--v apply to single builds");
        std::stringstream ss(cfg.blocks);
        std::string part;
        while (std::getline(ss, part, ',')) {
            const auto colon = part.find(':');
            if (colon == std::string::npos)
                throw UsageError("--blocks expects n:k pairs, e.g. 3:1,3:1");
            int bn = 0, bk = 0;
            try {
                bn = std::stoi(part.substr(0, colon));
                bk = std::stoi(part.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("--blocks expects integer n:k pairs");
            }
            BlockInput b;
            b.n = bn;
            b.k = bk;
            if (bk > 0) b.v = nst_harmonic(bn, bk);
            blocks.push_back(std::move(b));
        }
        if (blocks.empty()) throw UsageError("--blocks list is empty");
    } else {
        if (!cfg.have_n || !cfg.have_k) throw UsageError("--n and --k are required (or --blocks)");
        BlockInput b;
        b.n = cfg.n;
        b.k = cfg.k;
        if (cfg.k > 0) b.v = frame_for(cfg, cfg.n, cfg.k);
        blocks.push_back(std::move(b));
    }

    std::vector<double> betas;
    if (!cfg.betas.empty()) betas = parse_double_list(cfg.betas, "--beta");

    const auto [spec, z] = build_reducible(blocks, std::nullopt, betas);
    const double res = residual(z);
    const double d = dissonance(z.matrix());

    json j = spec_to_json(spec);
    j["residual"] = res;
    j["dissonance"] = d;
    j["checked"] = cfg.check;
    if (cfg.format == "csv") {
        std::string text = "block,n,k,p,q,beta\n";
        for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
            const auto& b = spec.blocks[i];
            text += std::to_string(i + 1) + "," + std::to_string(b.n) + "," + std::to_string(b.k) +
                    "," + format_double(b.p) + "," + format_double(b.q) + "," +
                    format_double(b.beta) + "\n";
        }
        text += "# epsilon=" + std::to_string(spec.epsilon) +
                " alpha=" + format_double(spec.alpha) + " residual=" + format_double(res) +
                " dissonance=" + format_double(d) + "\n";
        emit_text(cfg.output, text);
    } else {
        emit_text(cfg.output, j.dump(2) + "\n");
    }

    if (cfg.check && !(res < 1e-9)) {
        std::cerr << "equilibrium residual " << format_double(res) << " exceeds 1e-9\n";
        return kExitNumeric;
    }
    return kExitOk;
}

// --------------------------------------------------------------- montecarlo

struct MonteCarloConfig {
    std::string model_name;
    std::string family_name;
    int n = 0;
    int trials = 0;
    double chernoff_epsilon = 0.0;
    double chernoff_eta = 0.0;
    std::uint64_t seed = 0;
    int workers = 0;
    double zero_tol = 1e-7;
    std::string per_trial;
    bool timing = false;
    std::string output;
    std::string format = "json";
    IntegratorFlags integ;
    bool have_trials = false;
    bool have_chernoff = false;
};

int cmd_montecarlo(MonteCarloConfig& cfg) {
    const ModelKind model = parse_model(cfg.model_name);
    const Family family = parse_family(cfg.family_name);
    check_model_family(model, family);
    if (cfg.have_trials == cfg.have_chernoff)
        throw UsageError("size the batch with exactly one of --trials or "
                         "--chernoff-epsilon/--chernoff-eta");

    int trials = cfg.trials;
    std::optional<double> eps, eta;
    if (cfg.have_chernoff) {
        trials = chernoff_n(cfg.chernoff_epsilon, cfg.chernoff_eta);
        eps = cfg.chernoff_epsilon;
        eta = cfg.chernoff_eta;
    }
    if (trials < 1) throw UsageError("--trials must be positive");

    MonteCarloReport report =
        run_experiment(model, family, cfg.n, trials, cfg.seed, cfg.integ.opts, cfg.workers,
                       cfg.zero_tol);
    report.epsilon = eps;
    report.eta_conf = eta;

    if (cfg.format == "csv") {
        std::string text =
            "model,family,n,trials,master_seed,balanced_finite,balanced_components_finite,"
            "converged_unbalanced,no_decision,p_hat\n";
        text += std::string(to_string(report.model)) + "," + to_string(report.family) + "," +
                std::to_string(report.n) + "," + std::to_string(report.trials) + "," +
                std::to_string(report.master_seed) + "," +
                std::to_string(report.count(OutcomeKind::BalancedFinite)) + "," +
                std::to_string(report.count(OutcomeKind::BalancedComponentsFinite)) + "," +
                std::to_string(report.count(OutcomeKind::ConvergedUnbalanced)) + "," +
                std::to_string(report.count(OutcomeKind::NoDecision)) + "," +
                format_double(report.p_hat) + "\n";
        emit_text(cfg.output, text);
    } else {
        emit_text(cfg.output, report_to_json(report, cfg.timing).dump(2) + "\n");
    }

    if (!cfg.per_trial.empty()) {
        const std::string path = resolve_output(cfg.per_trial);
        auto out = open_output(path);
        write_trials_csv(out, report);
        if (!out.good()) throw IoError(path + ": write failed");
    }
    return kExitOk;
}

// ---------------------------------------------------------------- landscape

struct LandscapeConfig {
    int n = 3;
    LandscapeOptions opts;
    std::string output = "landscape.csv";
    std::string format = "csv";
};

int cmd_landscape(const LandscapeConfig& cfg) {
    if (cfg.n != 3) throw UsageError("the landscape is defined for --n 3 only");
    const LandscapeGrid grid = landscape_grid(cfg.opts);
    const std::string metadata = "n=3 grid_lon=" + std::to_string(cfg.opts.n_lon) +
                                 " grid_lat=" + std::to_string(cfg.opts.n_lat) +
                                 " stereographic=" + (cfg.opts.stereographic ? "1" : "0") +
                                 " matrix_norm=" + (cfg.opts.matrix_norm ? "1" : "0");
    const std::string path = resolve_output(cfg.output);
    if (cfg.format == "json") {
        json j;
        j["metadata"] = {{"n", 3},
                         {"grid_lon", cfg.opts.n_lon},
                         {"grid_lat", cfg.opts.n_lat},
                         {"stereographic", cfg.opts.stereographic},
                         {"matrix_norm", cfg.opts.matrix_norm}};
        j["x12"] = grid.x12;
        j["x23"] = grid.x23;
        j["x31"] = grid.x31;
        j["dissonance"] = grid.dissonance;
        if (cfg.opts.stereographic) {
            j["proj_x"] = grid.proj_x;
            j["proj_y"] = grid.proj_y;
        }
        auto out = open_output(path);
        out << j.dump() << '\n';
        if (!out.good()) throw IoError(path + ": write failed");
    } else {
        auto out = open_output(path);
        write_landscape_csv(out, grid, metadata);
        if (!out.good()) throw IoError(path + ": write failed");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-flow models of structural balance on signed appraisal networks"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    SimulateConfig sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate a model and write the trajectory");
    simulate->add_option("--model", sim.model_name, "pure | kulakowski | projected-pure | "
                                                    "projected-kulakowski | etaz")->required();
    simulate->add_option("--input", sim.input, "Initial state file (.csv/.json)");
    simulate->add_option("--family", sim.family_name, "Random family: symmetric | asymmetric | kulakowski")
        ->each([&sim](const std::string&) { sim.have_family = true; });
    simulate->add_option("--n", sim.n, "Network size for --family")
        ->each([&sim](const std::string&) { sim.have_n = true; });
    simulate->add_option("--seed", sim.seed, "Seed for --family")
        ->each([&sim](const std::string&) { sim.have_seed = true; });
    simulate->add_option("--output", sim.output, "Output base path (default 'trajectory')");
    simulate->add_option("--format", sim.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    sim.integ.attach(simulate);

    std::string cls_input, cls_output, cls_format = "json";
    double cls_zero_tol = 1e-7;
    auto* classify_cmd = app.add_subcommand("classify", "Structural-balance verdict for a matrix");
    classify_cmd->add_option("--input", cls_input, "Matrix file (.csv/.json)")->required();
    classify_cmd->add_option("--zero-tol", cls_zero_tol, "Sign threshold (default 1e-7)");
    classify_cmd->add_option("--output", cls_output, "Output file (default stdout)");
    classify_cmd->add_option("--format", cls_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    EquilibriaConfig eq;
    auto* equilibria = app.add_subcommand("equilibria", "Build and certify equilibria");
    equilibria->add_option("--n", eq.n, "Block size")
        ->each([&eq](const std::string&) { eq.have_n = true; });
    equilibria->add_option("--k", eq.k, "Frame rank (0 = zero block)")
        ->each([&eq](const std::string&) { eq.have_k = true; });
    equilibria->add_option("--s", eq.signs, "k=1 sign string, e.g. ++-+");
    equilibria->add_option("--angles", eq.angles, "k=2 angles (comma list, radians)");
    equilibria->add_option("--v", eq.frame_file, "Explicit n x k frame file");
    equilibria->add_option("--blocks", eq.blocks, "Reducible blocks as n:k pairs, e.g. 3:1,3:1");
    equilibria->add_option("--beta", eq.betas, "Explicit betas for the epsilon = 0 case");
    equilibria->add_flag("--check", eq.check, "Fail unless the residual is below 1e-9");
    equilibria->add_option("--output", eq.output, "Output file (default stdout)");
    equilibria->add_option("--format", eq.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    MonteCarloConfig mc;
    auto* montecarlo = app.add_subcommand("montecarlo", "Run a batch of random trials");
    montecarlo->add_option("--model", mc.model_name, "Model (see simulate)")->required();
    montecarlo->add_option("--family", mc.family_name, "Initial-condition family")->required();
    montecarlo->add_option("--n", mc.n, "Network size")->required();
    montecarlo->add_option("--trials", mc.trials, "Number of trials")
        ->each([&mc](const std::string&) { mc.have_trials = true; });
    montecarlo->add_option("--chernoff-epsilon", mc.chernoff_epsilon, "Chernoff accuracy")
        ->each([&mc](const std::string&) { mc.have_chernoff = true; });
    montecarlo->add_option("--chernoff-eta", mc.chernoff_eta, "Chernoff confidence")
        ->each([&mc](const std::string&) { mc.have_chernoff = true; });
    montecarlo->add_option("--seed", mc.seed, "Master seed")->required();
    montecarlo->add_option("--workers", mc.workers, "Worker threads (0 = all cores)");
    montecarlo->add_option("--zero-tol", mc.zero_tol, "Sign threshold (default 1e-7)");
    montecarlo->add_option("--per-trial", mc.per_trial, "Also write a per-trial CSV here");
    montecarlo->add_flag("--timing", mc.timing, "Include wall-clock runtime in the report");
    montecarlo->add_option("--output", mc.output, "Report file (default stdout)");
    montecarlo->add_option("--format", mc.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    mc.integ.attach(montecarlo);

    LandscapeConfig land;
    auto* landscape = app.add_subcommand("landscape", "Sample the n = 3 energy landscape");
    landscape->add_option("--n", land.n, "Must be 3");
    landscape->add_option("--grid-lon", land.opts.n_lon, "Longitude resolution (default 400)");
    landscape->add_option("--grid-lat", land.opts.n_lat, "Latitude resolution (default 200)");
    landscape->add_flag("--stereographic", land.opts.stereographic,
                        "Add north-pole projection columns");
    landscape->add_flag("--matrix-norm", land.opts.matrix_norm,
                        "Sample unit-Frobenius matrices instead of the coordinate sphere");
    landscape->add_option("--output", land.output, "Grid file (default landscape.csv)");
    landscape->add_option("--format", land.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (classify_cmd->parsed()) return cmd_classify(cls_input, cls_zero_tol, cls_output, cls_format);
        if (equilibria->parsed()) return cmd_equilibria(eq);
        if (montecarlo->parsed()) return cmd_montecarlo(mc);
        if (landscape->parsed()) return cmd_landscape(land);
        std::cerr << "no subcommand selected\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
