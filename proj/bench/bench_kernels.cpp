// Serial reference vs OpenMP kernels at the shapes the pipeline uses.

#include "sae/autoencoder.hpp"
#include "sae/kernels.hpp"
#include "sae/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace k = sae::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    sae::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v)
        x = rng.uniform(-1.0, 1.0);
    return v;
}

// Args: hidden p, input n.
template <auto Kernel>
void BM_affine_sigmoid(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0)), n = static_cast<std::size_t>(state.range(1));
    const auto w = random_values(p * n, 1), x = random_values(n, 2), b = random_values(p, 3);
    std::vector<double> out(p);
    for (auto _ : state) {
        Kernel(k::ConstMatrix{w.data(), p, n}, x, b, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p * n));
}

template <auto Kernel>
void BM_affine_sigmoid_transposed(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0)), n = static_cast<std::size_t>(state.range(1));
    const auto w = random_values(p * n, 1), h = random_values(p, 2), b = random_values(n, 3);
    std::vector<double> out(n);
    for (auto _ : state) {
        Kernel(k::ConstMatrix{w.data(), p, n}, h, b, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p * n));
}

// Batch of 20, the default minibatch.
template <auto Kernel>
void BM_tied_weight_gradient(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0)), n = static_cast<std::size_t>(state.range(1));
    constexpr std::size_t batch = 20;
    const auto dh = random_values(batch * p, 1), x = random_values(batch * n, 2), h = random_values(batch * p, 3),
               dy = random_values(batch * n, 4);
    std::vector<double> dw(p * n);
    for (auto _ : state) {
        Kernel({dh.data(), batch, p}, {x.data(), batch, n}, {h.data(), batch, p}, {dy.data(), batch, n},
               {dw.data(), p, n});
        benchmark::DoNotOptimize(dw.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch * p * n));
}

// Args: records, dim.
template <auto Kernel>
void BM_squared_distances(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0)), dim = static_cast<std::size_t>(state.range(1));
    const auto data = random_values(rows * dim, 1), q = random_values(dim, 2);
    std::vector<double> out(rows);
    for (auto _ : state) {
        Kernel(k::ConstMatrix{data.data(), rows, dim}, q, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * dim));
}

void layer_shapes(benchmark::internal::Benchmark* b) {
    b->Args({64, 1024})->Args({260, 500})->Args({600, 1024});
}

void index_shapes(benchmark::internal::Benchmark* b) {
    b->Args({1000, 64})->Args({12000, 260})->Args({12000, 1024});
}

void BM_train_epoch(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    std::vector<std::vector<double>> data;
    for (std::uint64_t i = 0; i < 200; ++i) {
        auto v = random_values(1024, 10 + i);
        for (auto& x : v)
            x = 0.5 + 0.5 * x;
        data.push_back(std::move(v));
    }
    sae::TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) {
        auto layer = sae::init_layer(1024, p, 0);
        benchmark::DoNotOptimize(sae::run_sgd(layer, data, cfg));
    }
}

} // namespace

BENCHMARK(BM_affine_sigmoid<k::serial::affine_sigmoid>)->Name("affine_sigmoid/serial")->Apply(layer_shapes);
BENCHMARK(BM_affine_sigmoid<k::parallel::affine_sigmoid>)->Name("affine_sigmoid/parallel")->Apply(layer_shapes);
BENCHMARK(BM_affine_sigmoid_transposed<k::serial::affine_sigmoid_transposed>)
    ->Name("affine_sigmoid_transposed/serial")
    ->Apply(layer_shapes);
BENCHMARK(BM_affine_sigmoid_transposed<k::parallel::affine_sigmoid_transposed>)
    ->Name("affine_sigmoid_transposed/parallel")
    ->Apply(layer_shapes);
BENCHMARK(BM_tied_weight_gradient<k::serial::tied_weight_gradient>)
    ->Name("tied_weight_gradient/serial")
    ->Apply(layer_shapes);
BENCHMARK(BM_tied_weight_gradient<k::parallel::tied_weight_gradient>)
    ->Name("tied_weight_gradient/parallel")
    ->Apply(layer_shapes);
BENCHMARK(BM_squared_distances<k::serial::squared_distances>)->Name("squared_distances/serial")->Apply(index_shapes);
BENCHMARK(BM_squared_distances<k::parallel::squared_distances>)
    ->Name("squared_distances/parallel")
    ->Apply(index_shapes);
BENCHMARK(BM_train_epoch)->Name("train_epoch_200x1024")->Arg(64)->Arg(600)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
