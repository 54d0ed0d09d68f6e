/// @file bench.hpp
/// @brief Benchmark records, CSV output and the measured runs behind spmvbench.
///
/// Timings use the monotonic clock. Each SpMV measurement verifies the
/// configuration against spmv_serial before any timing happens, runs a fixed
/// number of warm-up multiplies and reports the median of the timed ones.

#ifndef HSPMV_BENCH_HPP
#define HSPMV_BENCH_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hspmv/balance.hpp"
#include "hspmv/engine.hpp"
#include "hspmv/fabric.hpp"

namespace hspmv {

/// Parallel result differs from the serial oracle.
class OracleMismatch : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct BenchRecord {
    std::string matrix;
    std::string model;
    int nranks = 1;
    int threads = 1;
    int cores = 1;
    index_t reps = 0;
    /// Median seconds per repetition (per solve for CG rows).
    std::optional<double> median_s;
    double flops = 0.0;
    std::optional<double> gflops;
    std::optional<double> efficiency;
    std::optional<index_t> iterations;
    std::optional<bool> converged;
    std::string error;
};

inline constexpr int kWarmupMultiplies = 3;

double median(std::vector<double> samples);

/// flops / (seconds * 1e9), where `seconds` covers all the counted flops.
double gflops(double flops, double seconds);

/// (t_base * cores_base) / (t * cores).
double parallel_efficiency(double t_base, int cores_base, double t, int cores);

/// Fills `efficiency` of every timed record relative to records[baseline].
void apply_efficiency(std::span<BenchRecord> records, std::size_t baseline);

std::string csv_header();
std::string to_csv_row(const BenchRecord& r);

/// Appends rows, writing the header first when the file is new or empty.
void append_csv(const std::filesystem::path& path, std::span<const BenchRecord> records);

struct SpmvBenchOptions {
    ExecConfig config;
    LatencyModel latency;
    index_t reps = 10;
    int warmups = kWarmupMultiplies;
};

/// Checks the configuration against spmv_serial (throws OracleMismatch),
/// then times `reps` multiplies. flops = 2 * nnz * reps.
BenchRecord run_spmv_bench(const CsrMatrix& a, const std::string& matrix_id,
                           const SpmvBenchOptions& opts);

struct CgBenchOptions {
    ExecConfig config;
    LatencyModel latency;
    double rtol = 1e-5;
    index_t max_iterations = 10'000;
};

/// One timed CG solve with b = ones. reps is 1 and flops count the solve's
/// multiplies (2 * nnz * spmv_count). Breakdown and singular preconditioners
/// are reported in `error` rather than thrown.
BenchRecord run_cg_bench(const CsrMatrix& a, const std::string& matrix_id,
                         const CgBenchOptions& opts);

struct PartitionStatsRow {
    int rank = 0;
    Block block = Block::diag;
    PartitionScheme scheme = PartitionScheme::equal_rows;
    index_t block_nnz = 0;
    BalanceStats stats;
};

/// Imbalance of each scheme on every rank's diagonal and off-diagonal block,
/// weighted by stored nonzeros per row.
std::vector<PartitionStatsRow> partition_stats(const CsrMatrix& a, int nranks, int workers,
                                               std::span<const PartitionScheme> schemes,
                                               bool weighted_decomposition = false);

/// Smallest observable steady_clock increment, measured.
Nanos measured_clock_resolution();

}  // namespace hspmv

#endif  // HSPMV_BENCH_HPP
