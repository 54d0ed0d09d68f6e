#include "hspmv/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "hspmv/krylov.hpp"
#include "hspmv/layout.hpp"

namespace hspmv {
namespace {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double seconds(Nanos d) { return std::chrono::duration<double>(d).count(); }

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](double u, double v) {
               return std::bit_cast<std::uint64_t>(u) == std::bit_cast<std::uint64_t>(v);
           });
}

BenchRecord base_record(const std::string& id, const ExecConfig& cfg) {
    BenchRecord r;
    r.matrix = id;
    r.model = std::string(to_string(cfg.model));
    r.nranks = cfg.nranks;
    r.threads = cfg.threads_per_rank;
    r.cores = cfg.cores();
    return r;
}

}  // namespace

double median(std::vector<double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("median of no samples");
    }
    const auto mid = samples.size() / 2;
    std::nth_element(samples.begin(), samples.begin() + mid, samples.end());
    if (samples.size() % 2 == 1) {
        return samples[mid];
    }
    const double hi = samples[mid];
    const double lo = *std::max_element(samples.begin(), samples.begin() + mid);
    return 0.5 * (lo + hi);
}

double gflops(double flops, double secs) { return flops / (secs * 1e9); }

double parallel_efficiency(double t_base, int cores_base, double t, int cores) {
    return (t_base * cores_base) / (t * cores);
}

void apply_efficiency(std::span<BenchRecord> records, std::size_t baseline) {
    const BenchRecord& base = records[baseline];
    if (!base.median_s) {
        return;
    }
    const double t_base = *base.median_s;
    const int c_base = base.cores;
    for (std::size_t k = 0; k < records.size(); ++k) {
        auto& r = records[k];
        if (k == baseline) {
            r.efficiency = 1.0;
        } else if (r.median_s) {
            r.efficiency = parallel_efficiency(t_base, c_base, *r.median_s, r.cores);
        }
    }
}

std::string csv_header() {
    return "matrix,model,nranks,threads,reps,median_s,flops,gflops,efficiency,iterations,"
           "converged,error";
}

std::string to_csv_row(const BenchRecord& r) {
    std::ostringstream out;
    out << csv_escape(r.matrix) << ',' << r.model << ',' << r.nranks << ',' << r.threads << ','
        << r.reps << ',';
    if (r.median_s) out << format_real(*r.median_s);
    out << ',' << format_real(r.flops) << ',';
    if (r.gflops) out << format_real(*r.gflops);
    out << ',';
    if (r.efficiency) out << format_real(*r.efficiency);
    out << ',';
    if (r.iterations) out << *r.iterations;
    out << ',';
    if (r.converged) out << (*r.converged ? "true" : "false");
    out << ',' << csv_escape(r.error);
    return out.str();
}

void append_csv(const std::filesystem::path& path, std::span<const BenchRecord> records) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for appending");
    }
    if (fresh) {
        out << csv_header() << '\n';
    }
    for (const auto& r : records) {
        out << to_csv_row(r) << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

BenchRecord run_spmv_bench(const CsrMatrix& a, const std::string& matrix_id,
                           const SpmvBenchOptions& opts) {
    if (opts.reps < 1) {
        throw std::invalid_argument("reps must be >= 1");
    }
    auto fabric = std::make_shared<Fabric>(opts.config.nranks, opts.latency);
    MultContext ctx(a, opts.config, fabric);

    DenseVector x(static_cast<std::size_t>(a.ncols()));
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : x) v = dist(rng);

    DenseVector y(static_cast<std::size_t>(a.nrows()));
    ctx.mat_mult(x, y);
    if (!bitwise_equal(y, spmv_serial(a, x))) {
        throw OracleMismatch("model " + std::string(to_string(opts.config.model)) + " with " +
                             std::to_string(opts.config.nranks) + " ranks x " +
                             std::to_string(opts.config.threads_per_rank) +
                             " threads disagrees with the serial oracle");
    }

    for (int w = 0; w < opts.warmups; ++w) {
        ctx.mat_mult(x, y);
    }
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(opts.reps));
    for (index_t k = 0; k < opts.reps; ++k) {
        const auto t0 = Clock::now();
        ctx.mat_mult(x, y);
        samples.push_back(seconds(Clock::now() - t0));
    }

    BenchRecord r = base_record(matrix_id, opts.config);
    r.reps = opts.reps;
    r.median_s = median(samples);
    r.flops = spmv_flops(a.nnz()) * static_cast<double>(opts.reps);
    r.gflops = gflops(r.flops, *r.median_s * static_cast<double>(opts.reps));
    r.efficiency = 1.0;
    return r;
}

BenchRecord run_cg_bench(const CsrMatrix& a, const std::string& matrix_id,
                         const CgBenchOptions& opts) {
    auto fabric = std::make_shared<Fabric>(opts.config.nranks, opts.latency);
    MultContext ctx(a, opts.config, fabric);
    const DenseVector b(static_cast<std::size_t>(a.nrows()), 1.0);

    BenchRecord r = base_record(matrix_id, opts.config);
    r.reps = 1;
    try {
        const SolveResult res = cg_solve(ctx, b, opts.rtol, opts.max_iterations);
        r.median_s = seconds(res.report.wall_time);
        r.flops = spmv_flops(a.nnz()) * static_cast<double>(res.report.spmv_count);
        r.gflops = gflops(r.flops, *r.median_s);
        r.efficiency = 1.0;
        r.iterations = res.report.iterations;
        r.converged = res.report.converged;
    } catch (const CgBreakdown& e) {
        r.converged = false;
        r.error = e.what();
    } catch (const SingularPreconditioner& e) {
        r.converged = false;
        r.error = e.what();
    }
    return r;
}

std::vector<PartitionStatsRow> partition_stats(const CsrMatrix& a, int nranks, int workers,
                                               std::span<const PartitionScheme> schemes,
                                               bool weighted_decomposition) {
    std::vector<RowRange> ranges;
    if (weighted_decomposition) {
        const auto w = a.row_nnz_profile();
        ranges = decompose_rows(a.nrows(), nranks, std::span<const index_t>(w));
    } else {
        ranges = decompose_rows(a.nrows(), nranks);
    }
    std::vector<PartitionStatsRow> rows;
    for (int r = 0; r < nranks; ++r) {
        const RankLayout l = build_rank_layout(a, ranges, r);
        for (const Block block : {Block::diag, Block::off}) {
            const CsrMatrix& m = block == Block::diag ? l.diag : l.off;
            const auto weights = m.row_nnz_profile();
            for (const PartitionScheme s : schemes) {
                const auto p = make_partition(s, weights, workers);
                rows.push_back({r, block, s, m.nnz(), balance_stats(p, weights)});
            }
        }
    }
    return rows;
}

Nanos measured_clock_resolution() {
    Nanos best = Nanos::max();
    for (int k = 0; k < 200; ++k) {
        const auto t0 = Clock::now();
        auto t1 = Clock::now();
        while (t1 == t0) t1 = Clock::now();
        best = std::min(best, std::chrono::duration_cast<Nanos>(t1 - t0));
    }
    return best;
}

}  // namespace hspmv
