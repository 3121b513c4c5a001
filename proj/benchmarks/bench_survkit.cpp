#include <benchmark/benchmark.h>

#include <random>

#include "survkit/cohort.hpp"
#include "survkit/curves.hpp"
#include "survkit/forest.hpp"
#include "survkit/metrics.hpp"
#include "survkit/select.hpp"
#include "survkit/survnet.hpp"
#include "survkit/timegrid.hpp"

using namespace survkit;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = z(rng);
    return m;
}

TargetBatch random_targets(std::size_t rows, const TimeGrid& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t(0.0, grid.max_time());
    std::vector<SurvivalTarget> out;
    for (std::size_t r = 0; r < rows; ++r) out.push_back(make_target(grid, t(rng), static_cast<int>(rng() % 2)));
    return stack_targets(out);
}

NetworkShape full_shape(std::size_t input_dim) {
    NetworkShape s;
    s.input_dim = input_dim;
    s.n_intervals = 15;
    return s;
}

}  // namespace

// One mini-batch of the default network: forward, loss gradient, backward.
static void BM_TrainStep(benchmark::State& state) {
    const auto batch = static_cast<Eigen::Index>(state.range(0));
    const auto net = init_network(full_shape(40), 1);
    const Matrix X = random_matrix(batch, 40, 2);
    const auto targets = random_targets(static_cast<std::size_t>(batch), build_grid(3000, 15), 3);
    Rng rng(4);
    for (auto _ : state) {
        const auto cache = forward(net, X, Mode::train, &rng);
        auto grads = backward(net, cache, targets);
        benchmark::DoNotOptimize(grads);
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128);

static void BM_EvalForward(benchmark::State& state) {
    const auto rows = static_cast<Eigen::Index>(state.range(0));
    const auto net = init_network(full_shape(40), 1);
    const Matrix X = random_matrix(rows, 40, 2);
    for (auto _ : state) {
        auto cache = forward(net, X, Mode::eval);
        benchmark::DoNotOptimize(cache.pred);
    }
    state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_EvalForward)->Arg(250)->Arg(1000);

static void BM_ForestFit(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Matrix X = random_matrix(n, 8, 5);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) y[static_cast<std::size_t>(r)] = 100.0 * std::exp(X(r, 0));
    ForestParams params;
    for (auto _ : state) {
        auto forest = fit_forest(X, y, params, 6);
        benchmark::DoNotOptimize(forest.trees.data());
    }
}
BENCHMARK(BM_ForestFit)->Arg(250)->Unit(benchmark::kMillisecond);

static void BM_Concordance(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const auto grid = build_grid(3000, 15);
    Matrix cond = random_matrix(n, 15, 7).array().abs();
    cond = (1.0 + cond.array()).inverse();
    const auto curves = curves_from_predictions(cond, grid);
    std::mt19937_64 rng(8);
    std::vector<double> times(static_cast<std::size_t>(n));
    std::vector<int> events(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < times.size(); ++i) {
        times[i] = static_cast<double>(rng() % 3000);
        events[i] = rng() % 4 == 0 ? 1 : 0;
    }
    events[0] = 1;
    for (auto _ : state) benchmark::DoNotOptimize(c_td(curves, times, events).c_td);
}
BENCHMARK(BM_Concordance)->Arg(100)->Arg(1000);

static void BM_Interpolate(benchmark::State& state) {
    const auto grid = build_grid(3000, 15);
    std::vector<double> cond(15, 0.97);
    const auto knots = cumulative_survival(cond);
    for (auto _ : state) benchmark::DoNotOptimize(interpolate(grid, knots).dense_values.data());
}
BENCHMARK(BM_Interpolate);
BENCHMARK_MAIN();
