// Microbenchmarks for the hot paths: field evaluation, energy and gradient,
// equilibrium construction, pattern classification, and full trial runs.

#include "balanceflow/balance.hpp"
#include "balanceflow/dissonance.hpp"
#include "balanceflow/dynamics.hpp"
#include "balanceflow/equilibria.hpp"
#include "balanceflow/montecarlo.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace balanceflow;

namespace {

Matrix random_symmetric_unit(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) x(i, j) = x(j, i) = u(rng);
    return x / x.norm();
}

void BM_Dissonance(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const Matrix x = random_symmetric_unit(int(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(dissonance(x));
}
BENCHMARK(BM_Dissonance)->Arg(5)->Arg(10)->Arg(15);

void BM_GradSphere(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const SphereAppraisal z(random_symmetric_unit(int(state.range(0)), rng));
    for (auto _ : state) benchmark::DoNotOptimize(grad_sphere(z));
}
BENCHMARK(BM_GradSphere)->Arg(5)->Arg(10)->Arg(15);

void BM_RhsProjected(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const Matrix z = random_symmetric_unit(int(state.range(0)), rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(rhs(ModelKind::ProjectedPureInfluence, z));
}
BENCHMARK(BM_RhsProjected)->Arg(5)->Arg(10)->Arg(15);

void BM_BuildIrreducible(benchmark::State& state) {
    const NstMatrix v = nst_harmonic(10, 3);
    for (auto _ : state) {
        const SphereAppraisal z = build_irreducible(10, 3, v);
        benchmark::DoNotOptimize(residual(z));
    }
}
BENCHMARK(BM_BuildIrreducible);

void BM_FactionPartition(benchmark::State& state) {
    const int n = int(state.range(0));
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> bit(0, 1);
    Eigen::MatrixXi signs = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) signs(i, j) = signs(j, i) = bit(rng) ? 1 : -1;
    const SignPattern pattern(signs);
    for (auto _ : state) benchmark::DoNotOptimize(faction_partition(pattern));
}
BENCHMARK(BM_FactionPartition)->Arg(10)->Arg(25);

void BM_IntegrateToConvergence(benchmark::State& state) {
    const int n = int(state.range(0));
    std::mt19937_64 rng(5);
    const Matrix z0 = random_symmetric_unit(n, rng);
    for (auto _ : state) {
        const Trajectory traj =
            integrate(ModelKind::ProjectedPureInfluence, z0, montecarlo_options());
        benchmark::DoNotOptimize(traj.terminal().time);
    }
}
BENCHMARK(BM_IntegrateToConvergence)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_MonteCarloTrial(benchmark::State& state) {
    std::uint64_t index = 0;
    for (auto _ : state) {
        const Matrix x0 = gen_initial(Family::GenericSymmetric, 5, trial_seed(7, index++));
        const Trajectory traj = integrate(ModelKind::ProjectedPureInfluence,
                                          Matrix(x0 / x0.norm()), montecarlo_options());
        benchmark::DoNotOptimize(classify_outcome(traj));
    }
}
BENCHMARK(BM_MonteCarloTrial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
