// Serial reference vs OpenMP kernels: histogram fitting, batched eta
// prediction, feature embedding and the surrogate objective.

#include "abstain/histogram.hpp"
#include "abstain/problems.hpp"
#include "abstain/surrogate.hpp"

#include <benchmark/benchmark.h>

using namespace abstain;

namespace {

const LabeledSet& smooth_sample() {
    static const LabeledSet s = Problem::smooth_nd(2, 0.4).sample_labeled(200000, 1);
    return s;
}

const PointSet& queries() {
    static const PointSet q = Problem::smooth_nd(2, 0.4).sample_unlabeled(50000, 2);
    return q;
}

const HistogramEstimator& estimator() {
    static const HistogramEstimator e =
        fit(smooth_sample(), BandwidthLadder::make(smooth_sample().size(), 1.0, 2), std::nullopt, 0.1);
    return e;
}

const FourierFeatures& features() {
    static const FourierFeatures f = FourierFeatures::sample(2, 200, 0.3, 3);
    return f;
}

void BM_FitSerial(benchmark::State& st) {
    const auto ladder = BandwidthLadder::make(smooth_sample().size(), 1.0, 2);
    for (auto _ : st) benchmark::DoNotOptimize(reference::fit_serial(smooth_sample(), ladder));
}

void BM_FitParallel(benchmark::State& st) {
    const auto ladder = BandwidthLadder::make(smooth_sample().size(), 1.0, 2);
    for (auto _ : st) benchmark::DoNotOptimize(fit(smooth_sample(), ladder));
}

void BM_PredictSerial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(reference::predict_eta_batch_serial(estimator(), queries()));
}

void BM_PredictParallel(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(predict_eta_batch(estimator(), queries()));
}

void BM_EmbedSerial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(reference::embed_batch_serial(features(), queries()));
}

void BM_EmbedParallel(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(embed_batch(features(), queries()));
}

struct ObjectiveInputs {
    LabeledSet labeled = Problem::two_gaussians().sample_labeled(20000, 4);
    EmbeddedSet zl = embed_batch(features(), labeled.points);
    EmbeddedSet zu = embed_batch(features(), Problem::two_gaussians().sample_unlabeled(20000, 5));
    std::vector<double> theta = std::vector<double>(2 * features().dim_out() + 2, 0.01);
    std::vector<double> grad = std::vector<double>(theta.size());
};

ObjectiveInputs& objective_inputs() {
    static ObjectiveInputs in;
    return in;
}

void BM_ObjectiveSerial(benchmark::State& st) {
    auto& in = objective_inputs();
    const ObjectiveTerms terms{.lambda = 0.2, .nu = 1.0, .l2 = 1e-3};
    for (auto _ : st) {
        benchmark::DoNotOptimize(
            reference::objective_and_subgradient_serial(in.theta, in.zl, in.labeled.labels, &in.zu, terms, in.grad));
    }
}

void BM_ObjectiveParallel(benchmark::State& st) {
    auto& in = objective_inputs();
    const ObjectiveTerms terms{.lambda = 0.2, .nu = 1.0, .l2 = 1e-3};
    for (auto _ : st) {
        benchmark::DoNotOptimize(objective_and_subgradient(in.theta, in.zl, in.labeled.labels, &in.zu, terms, in.grad));
    }
}

}  // namespace

BENCHMARK(BM_FitSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmbedSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmbedParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObjectiveSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObjectiveParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
