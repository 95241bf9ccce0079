#include <benchmark/benchmark.h>

#include <random>

#include "gbho/linalg.hpp"

using namespace gbho::linalg;

namespace {

Matrix random_spd(Eigen::Index n) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = u(rng);
    }
    return m.transpose() * m + Matrix::Identity(n, n);
}

} // namespace

static void BM_Cholesky(benchmark::State& state) {
    const Matrix a = random_spd(state.range(0));
    for (auto _ : state) {
        auto factor = cholesky(a, 1e-10);
        benchmark::DoNotOptimize(factor.lower.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cholesky)->Arg(25)->Arg(50)->Arg(100)->Arg(200)->Complexity();

static void BM_SolveSpd(benchmark::State& state) {
    const Matrix a = random_spd(state.range(0));
    const auto factor = cholesky(a, 1e-10);
    const Vector b = Vector::Ones(state.range(0));
    for (auto _ : state) {
        Vector x = solve_spd(factor, b);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_SolveSpd)->Arg(25)->Arg(50)->Arg(100)->Arg(200);
