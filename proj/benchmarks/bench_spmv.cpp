#include <benchmark/benchmark.h>

#include <random>

#include "hspmv/balance.hpp"
#include "hspmv/engine.hpp"
#include "hspmv/generators.hpp"
#include "hspmv/krylov.hpp"

namespace {

using namespace hspmv;

const CsrMatrix& laplacian() {
    static const CsrMatrix a = gen_extruded_laplacian(32, 32, 32);
    return a;
}

DenseVector input(index_t n) {
    DenseVector x(static_cast<std::size_t>(n));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (auto& v : x) v = d(rng);
    return x;
}

void BM_SerialSpmv(benchmark::State& state) {
    const auto& a = laplacian();
    const auto x = input(a.ncols());
    DenseVector y(x.size());
    for (auto _ : state) {
        spmv_serial(a, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.counters["flops"] =
        benchmark::Counter(spmv_flops(a.nnz()), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_SerialSpmv)->Unit(benchmark::kMicrosecond);

// args: model, ranks, threads per rank
void BM_ModelSpmv(benchmark::State& state) {
    const auto& a = laplacian();
    ExecConfig cfg;
    cfg.model = static_cast<ExecModel>(state.range(0));
    cfg.nranks = static_cast<int>(state.range(1));
    cfg.threads_per_rank = static_cast<int>(state.range(2));
    auto ctx = create_context(a, cfg);
    const auto x = input(a.ncols());
    DenseVector y(x.size());
    for (auto _ : state) {
        ctx->mat_mult(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetLabel(std::string(to_string(cfg.model)));
    state.counters["flops"] =
        benchmark::Counter(spmv_flops(a.nnz()), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_ModelSpmv)
    ->ArgNames({"model", "ranks", "threads"})
    ->Args({static_cast<int>(ExecModel::vector), 1, 2})
    ->Args({static_cast<int>(ExecModel::vector), 2, 2})
    ->Args({static_cast<int>(ExecModel::task), 2, 2})
    ->Args({static_cast<int>(ExecModel::task_balanced), 2, 2})
    ->Args({static_cast<int>(ExecModel::task), 2, 4})
    ->Unit(benchmark::kMicrosecond)
    ->UseRealTime();

void BM_Partition(benchmark::State& state) {
    const auto a = gen_arrowhead(1 << 16);
    const auto w = a.row_nnz_profile();
    const auto scheme = static_cast<PartitionScheme>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(make_partition(scheme, w, 8));
    }
    state.SetLabel(std::string(to_string(scheme)));
}
BENCHMARK(BM_Partition)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_CgSolve(benchmark::State& state) {
    const auto a = gen_extruded_laplacian(16, 16, 16);
    ExecConfig cfg;
    cfg.model = ExecModel::task;
    cfg.nranks = 2;
    cfg.threads_per_rank = 2;
    auto ctx = create_context(a, cfg);
    const DenseVector b(static_cast<std::size_t>(a.nrows()), 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cg_solve(*ctx, b, 1e-6).report.iterations);
    }
}
BENCHMARK(BM_CgSolve)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
