// Serial reference vs OpenMP kernels on the shapes the algorithms use.
// Args: {n, exec} with exec 0 = serial, 1 = parallel; d = 10 throughout.
#include <benchmark/benchmark.h>

#include <random>

#include "pushpull/kernels.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/objective.hpp"
#include "pushpull/topology.hpp"

using namespace pushpull;

namespace {

constexpr std::size_t kDim = 10;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (double& v : m.row(i)) v = z(rng);
    return m;
}

Matrix mixing_matrix(std::size_t n) {
    const Digraph g = build_topology({TopologyKind::Exponential, n, {}, 1});
    return build_weight_matrix(g, Stochasticity::Row, 2).weights();
}

kernels::Exec exec_of(const benchmark::State& state) {
    return state.range(1) ? kernels::Exec::Parallel : kernels::Exec::Serial;
}

void BM_mix(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix w = mixing_matrix(n), x = random_matrix(n, kDim, 3);
    Matrix out(n, kDim);
    for (auto _ : state) {
        kernels::mix(w, x, out, exec_of(state));
        benchmark::DoNotOptimize(out(0, 0));
    }
    state.SetItemsProcessed(state.iterations() * n * n * kDim);
}

void BM_mix_axpy(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix w = mixing_matrix(n), x = random_matrix(n, kDim, 3), y = random_matrix(n, kDim, 4);
    Matrix out(n, kDim);
    for (auto _ : state) {
        kernels::mix_axpy(w, x, 0.01, y, out, exec_of(state));
        benchmark::DoNotOptimize(out(0, 0));
    }
    state.SetItemsProcessed(state.iterations() * n * n * kDim);
}

void BM_track(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix w = mixing_matrix(n), y = random_matrix(n, kDim, 3);
    const Matrix g0 = random_matrix(n, kDim, 4), g1 = random_matrix(n, kDim, 5);
    Matrix out(n, kDim);
    for (auto _ : state) {
        kernels::track(w, y, g0, g1, out, exec_of(state));
        benchmark::DoNotOptimize(out(0, 0));
    }
    state.SetItemsProcessed(state.iterations() * n * n * kDim);
}

void BM_stacked_gradient(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto ds = synthesize(200 * n, kDim, 7, 0.01);
    const auto shards = partition(ds, n);
    const Matrix x = Matrix::broadcast_rows(n, ds.x_opt);
    for (auto _ : state) {
        Matrix g = stacked_full_gradient(shards, x, exec_of(state));
        benchmark::DoNotOptimize(g(0, 0));
    }
}

void node_args(benchmark::internal::Benchmark* b) {
    for (long n : {16, 64, 256, 1024})
        for (long e : {0, 1}) b->Args({n, e});
    b->ArgNames({"n", "parallel"});
}

}  // namespace

BENCHMARK(BM_mix)->Apply(node_args);
BENCHMARK(BM_mix_axpy)->Apply(node_args);
BENCHMARK(BM_track)->Apply(node_args);
BENCHMARK(BM_stacked_gradient)->Apply(node_args);

BENCHMARK_MAIN();
