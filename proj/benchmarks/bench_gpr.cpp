#include <benchmark/benchmark.h>

#include <random>

#include "gbho/gpr.hpp"

using namespace gbho;
using namespace gbho::gpr;

namespace {

ValueSample random_sample(int size, int dims) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Box box = Box::cube(dims, -10.0, 0.0);
    ValueSample sample;
    for (int i = 0; i < size; ++i) {
        Eigen::VectorXd v(dims);
        for (int k = 0; k < dims; ++k) v(k) = -10.0 + 10.0 * u(rng);
        sample.points.push_back({make_hyper_point(v, box), std::sin(3.0 * u(rng))});
    }
    return sample;
}

} // namespace

static void BM_MleFit(benchmark::State& state) {
    const auto sample = random_sample(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) {
        GprModel model = mle_fit(sample, MleConfig{});
        benchmark::DoNotOptimize(model.sigma2);
    }
}
BENCHMARK(BM_MleFit)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_Predict(benchmark::State& state) {
    const auto sample = random_sample(static_cast<int>(state.range(0)), 2);
    const GprModel model = mle_fit(sample, MleConfig{});
    const auto probe = make_hyper_point(Eigen::VectorXd::Constant(2, -4.5), model.bounds);
    for (auto _ : state) {
        auto pred = predict(model, probe);
        benchmark::DoNotOptimize(pred.mean);
    }
}
BENCHMARK(BM_Predict)->Arg(10)->Arg(25)->Arg(50);

static void BM_PredictGrad(benchmark::State& state) {
    const auto sample = random_sample(static_cast<int>(state.range(0)), 2);
    const GprModel model = mle_fit(sample, MleConfig{});
    const auto probe = make_hyper_point(Eigen::VectorXd::Constant(2, -4.5), model.bounds);
    for (auto _ : state) {
        auto grad = predict_grad(model, probe);
        benchmark::DoNotOptimize(grad.mean.data());
    }
}
BENCHMARK(BM_PredictGrad)->Arg(10)->Arg(25)->Arg(50);

static void BM_Augment(benchmark::State& state) {
    const auto sample = random_sample(static_cast<int>(state.range(0)), 2);
    const GprModel model = mle_fit(sample, MleConfig{});
    const auto fresh = make_hyper_point(Eigen::VectorXd::Constant(2, -3.21), model.bounds);
    for (auto _ : state) {
        GprModel next = augment(model, fresh, 0.4);
        benchmark::DoNotOptimize(next.sigma2);
    }
}
BENCHMARK(BM_Augment)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);
