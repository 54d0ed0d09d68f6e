// spmvbench: generate matrices, time multiplies and solves, report partition balance.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hspmv/bench.hpp"
#include "hspmv/generators.hpp"
#include "hspmv/krylov.hpp"
#include "hspmv/matrix_market.hpp"

namespace {

using namespace hspmv;

struct RunFlags {
    std::string model = "serial";
    int ranks = 1;
    int threads = 1;
    double latency_us = 0.0;
    double latency_per_elem_ns = 0.0;
    std::string progress = "active";
    std::string csv;
    bool weighted = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_model) {
    if (with_model) {
        cmd->add_option("--model", f.model, "serial|vector|task|task-balanced")
            ->check(CLI::IsMember({"serial", "vector", "task", "task-balanced"}));
        cmd->add_option("--ranks", f.ranks, "simulated ranks")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", f.threads, "threads per rank")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--latency-us", f.latency_us, "per-message latency")->check(CLI::NonNegativeNumber);
    cmd->add_option("--latency-per-elem-ns", f.latency_per_elem_ns, "per-element latency")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--progress", f.progress, "message progress mode")
        ->check(CLI::IsMember({"active", "background"}));
    cmd->add_option("--csv", f.csv, "append result rows to this CSV file");
    cmd->add_flag("--weighted-decomp", f.weighted, "cut rank ranges by nonzero count");
}

LatencyModel latency_of(const RunFlags& f) {
    LatencyModel m;
    m.per_message = std::chrono::duration_cast<Nanos>(std::chrono::duration<double, std::micro>(f.latency_us));
    m.per_element = std::chrono::duration_cast<Nanos>(std::chrono::duration<double, std::nano>(f.latency_per_elem_ns));
    m.mode = parse_progress_mode(f.progress);
    return m;
}

ExecConfig config_of(const std::string& model, int ranks, int threads, bool weighted) {
    ExecConfig c;
    c.model = parse_exec_model(model);
    c.nranks = ranks;
    c.threads_per_rank = threads;
    c.weighted_decomposition = weighted;
    validate(c);
    return c;
}

void print_metadata() {
    std::printf("# clock steady_clock resolution_ns=%lld\n",
                static_cast<long long>(measured_clock_resolution().count()));
}

void emit(const std::vector<BenchRecord>& rows, const std::string& csv) {
    std::cout << csv_header() << '\n';
    for (const auto& r : rows) std::cout << to_csv_row(r) << '\n';
    if (!csv.empty()) append_csv(csv, rows);
}

void apply_baseline(BenchRecord& r, std::optional<double> base_s, int base_cores) {
    if (base_s && r.median_s) r.efficiency = parallel_efficiency(*base_s, base_cores, *r.median_s, r.cores);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string::npos ? s.size() : comma;
        if (end > start) out.push_back(s.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) out.push_back(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid SpMV benchmark harness"};
    app.require_subcommand(1);

    // gen
    index_t nx = 0, ny = 0, layers = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "write an extruded Laplacian in Matrix Market format");
    gen->add_option("nx", nx)->required();
    gen->add_option("ny", ny)->required();
    gen->add_option("layers", layers)->required();
    gen->add_option("out", gen_out)->required();

    // synth
    std::string synth_kind;
    index_t synth_n = 0;
    double synth_density = 0.05;
    std::uint64_t synth_seed = 1;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "write a tridiagonal, arrowhead or random SPD matrix");
    synth->add_option("kind", synth_kind)->required()->check(CLI::IsMember({"tridiagonal", "arrowhead", "random-spd"}));
    synth->add_option("n", synth_n)->required();
    synth->add_option("out", synth_out)->required();
    synth->add_option("--density", synth_density, "random-spd off-diagonal density");
    synth->add_option("--seed", synth_seed, "random-spd seed");

    // spmv
    std::string matrix;
    RunFlags run;
    index_t reps = 10;
    std::optional<double> baseline_s;
    int baseline_cores = 1;
    auto* spmv = app.add_subcommand("spmv", "time repeated multiplies");
    spmv->add_option("matrix", matrix)->required()->check(CLI::ExistingFile);
    add_run_flags(spmv, run, true);
    spmv->add_option("--reps", reps, "timed multiplies")->check(CLI::PositiveNumber);
    spmv->add_option("--baseline-s", baseline_s, "baseline median seconds for efficiency");
    spmv->add_option("--baseline-cores", baseline_cores, "baseline core count")->check(CLI::PositiveNumber);

    // cg
    double rtol = kDefaultRtol;
    index_t max_it = kDefaultMaxIterations;
    auto* cg = app.add_subcommand("cg", "time one Jacobi-PCG solve with b = ones");
    cg->add_option("matrix", matrix)->required()->check(CLI::ExistingFile);
    add_run_flags(cg, run, true);
    cg->add_option("--rtol", rtol, "relative residual tolerance");
    cg->add_option("--max-iterations", max_it, "iteration cap")->check(CLI::PositiveNumber);
    cg->add_option("--baseline-s", baseline_s, "baseline solve seconds for efficiency");
    cg->add_option("--baseline-cores", baseline_cores, "baseline core count")->check(CLI::PositiveNumber);

    // sweep
    std::string models = "serial,vector,task,task-balanced";
    std::string ranks_list = "1,2";
    std::string threads_list = "2,4";
    bool sweep_cg = false;
    auto* sweep = app.add_subcommand("sweep", "time every model x ranks x threads combination; "
                                              "the first row is the efficiency baseline");
    sweep->add_option("matrix", matrix)->required()->check(CLI::ExistingFile);
    add_run_flags(sweep, run, false);
    sweep->add_option("--models", models, "comma-separated models");
    sweep->add_option("--ranks-list", ranks_list, "comma-separated rank counts");
    sweep->add_option("--threads-list", threads_list, "comma-separated threads per rank");
    sweep->add_option("--reps", reps, "timed multiplies")->check(CLI::PositiveNumber);
    sweep->add_flag("--cg", sweep_cg, "time CG solves instead of multiplies");
    sweep->add_option("--rtol", rtol, "relative residual tolerance for --cg");

    // partition-stats
    int workers = 4;
    int ps_ranks = 1;
    std::string scheme = "all";
    bool ps_weighted = false;
    auto* pstats = app.add_subcommand("partition-stats", "compare thread partition schemes per block");
    pstats->add_option("matrix", matrix)->required()->check(CLI::ExistingFile);
    pstats->add_option("--workers", workers, "compute threads per rank")->check(CLI::PositiveNumber);
    pstats->add_option("--ranks", ps_ranks, "simulated ranks")->check(CLI::PositiveNumber);
    pstats->add_option("--scheme", scheme, "equal-rows|greedy|diffuse|all")
        ->check(CLI::IsMember({"equal-rows", "greedy", "diffuse", "all"}));
    pstats->add_flag("--weighted-decomp", ps_weighted, "cut rank ranges by nonzero count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto a = gen_extruded_laplacian(nx, ny, layers);
            write_matrix_market(std::filesystem::path(gen_out), a);
            std::printf("N=%lld nnz=%lld\n", static_cast<long long>(a.nrows()),
                        static_cast<long long>(a.nnz()));
        } else if (*synth) {
            CsrMatrix a;
            if (synth_kind == "tridiagonal") {
                a = gen_tridiagonal(synth_n);
            } else if (synth_kind == "arrowhead") {
                a = gen_arrowhead(synth_n);
            } else {
                a = gen_random_spd(synth_n, synth_density, synth_seed);
            }
            write_matrix_market(std::filesystem::path(synth_out), a);
            std::printf("N=%lld nnz=%lld\n", static_cast<long long>(a.nrows()),
                        static_cast<long long>(a.nnz()));
        } else if (*spmv) {
            const auto a = read_matrix_market(std::filesystem::path(matrix));
            SpmvBenchOptions o;
            o.config = config_of(run.model, run.ranks, run.threads, run.weighted);
            o.latency = latency_of(run);
            o.reps = reps;
            auto r = run_spmv_bench(a, matrix, o);
            apply_baseline(r, baseline_s, baseline_cores);
            print_metadata();
            emit({r}, run.csv);
        } else if (*cg) {
            const auto a = read_matrix_market(std::filesystem::path(matrix));
            CgBenchOptions o;
            o.config = config_of(run.model, run.ranks, run.threads, run.weighted);
            o.latency = latency_of(run);
            o.rtol = rtol;
            o.max_iterations = max_it;
            auto r = run_cg_bench(a, matrix, o);
            apply_baseline(r, baseline_s, baseline_cores);
            print_metadata();
            emit({r}, run.csv);
        } else if (*sweep) {
            const auto a = read_matrix_market(std::filesystem::path(matrix));
            std::vector<ExecConfig> configs;
            for (const auto& m : split_list(models)) {
                for (const int nr : split_ints(ranks_list)) {
                    if (parse_exec_model(m) == ExecModel::serial) {
                        if (nr == split_ints(ranks_list).front()) configs.push_back(config_of(m, 1, 1, run.weighted));
                        continue;
                    }
                    for (const int t : split_ints(threads_list)) {
                        if (parse_exec_model(m) != ExecModel::vector && t < 2) continue;
                        configs.push_back(config_of(m, nr, t, run.weighted));
                    }
                }
            }
            std::vector<BenchRecord> rows;
            for (const auto& c : configs) {
                if (sweep_cg) {
                    CgBenchOptions o;
                    o.config = c;
                    o.latency = latency_of(run);
                    o.rtol = rtol;
                    rows.push_back(run_cg_bench(a, matrix, o));
                } else {
                    SpmvBenchOptions o;
                    o.config = c;
                    o.latency = latency_of(run);
                    o.reps = reps;
                    rows.push_back(run_spmv_bench(a, matrix, o));
                }
            }
            if (!rows.empty()) apply_efficiency(rows, 0);
            print_metadata();
            emit(rows, run.csv);
        } else if (*pstats) {
            const auto a = read_matrix_market(std::filesystem::path(matrix));
            std::vector<PartitionScheme> schemes;
            if (scheme == "all") {
                schemes = {PartitionScheme::equal_rows, PartitionScheme::greedy, PartitionScheme::greedy_diffuse};
            } else {
                schemes = {parse_partition_scheme(scheme)};
            }
            const auto rows = partition_stats(a, ps_ranks, workers, schemes, ps_weighted);
            std::printf("%-5s %-5s %-11s %12s %12s %12s %10s\n", "rank", "block", "scheme", "block_nnz",
                        "max_load", "mean_load", "imbalance");
            for (const auto& r : rows) {
                std::printf("%-5d %-5s %-11s %12lld %12lld %12.2f %10.4f\n", r.rank,
                            r.block == Block::diag ? "diag" : "off", std::string(to_string(r.scheme)).c_str(),
                            static_cast<long long>(r.block_nnz), static_cast<long long>(r.stats.max_load),
                            r.stats.mean_load, r.stats.imbalance);
            }
        }
    } catch (const OracleMismatch& e) {
        std::cerr << "oracle mismatch: " << e.what() << '\n';
        return 2;
    } catch (const StructuralError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
