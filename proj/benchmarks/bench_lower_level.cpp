#include <benchmark/benchmark.h>

#include <random>

#include "gbho/lower_level.hpp"

using namespace gbho;

namespace {

LabeledSet random_blobs(Eigen::Index n, int d, int classes) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    LabeledSet set;
    set.kind = TaskKind::classification;
    set.classes = classes;
    set.features.resize(n, d);
    set.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % classes);
        for (int k = 0; k < d; ++k) set.features(i, k) = 0.5 * c + normal(rng);
        set.labels(i) = c;
    }
    return set;
}

HyperPoint lambda1(double v) {
    return make_hyper_point(Eigen::VectorXd::Constant(1, v), Box::cube(1, -10.0, 0.0));
}

} // namespace

// one epoch-equivalent of full-batch gradient work on an MNIST-sized MLP
static void BM_MlpFullBatchGrad(benchmark::State& state) {
    const auto data = random_blobs(state.range(0), 784, 10);
    const auto spec = make_mlp_spec(784, 100, 10, 1);
    const auto lambda = lambda1(-4.0);
    ParamVector beta = ParamVector::Constant(param_count(spec), 0.01);
    for (auto _ : state) {
        LowerGrad grad;
        benchmark::DoNotOptimize(lower_loss_grad(lambda, beta, spec, data, &grad));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpFullBatchGrad)->Arg(128)->Arg(600)->Unit(benchmark::kMillisecond);

static void BM_MlpTraining(benchmark::State& state) {
    const auto data = random_blobs(600, 784, 10);
    const auto spec = make_mlp_spec(784, 100, 10, 1);
    TrainBudget budget;
    budget.max_epochs = static_cast<int>(state.range(0));
    budget.batch_size = 64;
    for (auto _ : state) {
        auto sol = solve_lower(lambda1(-4.0), spec, data, budget);
        benchmark::DoNotOptimize(sol.phi);
    }
}
BENCHMARK(BM_MlpTraining)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_RidgeClosedForm(benchmark::State& state) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    LabeledSet data;
    data.kind = TaskKind::regression;
    data.features.resize(200, 30);
    data.labels.resize(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        for (int k = 0; k < 30; ++k) data.features(i, k) = normal(rng);
        data.labels(i) = normal(rng);
    }
    const auto spec = make_ridge_spec(30, 1);
    for (auto _ : state) {
        auto sol = solve_lower(lambda1(-3.0), spec, data, TrainBudget{});
        benchmark::DoNotOptimize(sol.phi);
    }
}
BENCHMARK(BM_RidgeClosedForm);
