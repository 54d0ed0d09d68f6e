// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hspmv/bench.hpp"
#include "hspmv/generators.hpp"
#include "hspmv/krylov.hpp"
#include "hspmv/matrix_market.hpp"
#include "oracles.hpp"

using namespace hspmv;
using namespace std::chrono_literals;

namespace {

// Pinned tolerances and limits.
constexpr double kCriterion1BudgetS = 120.0;
constexpr double kCriterion2BudgetS = 30.0;
constexpr double kCriterion3BudgetS = 60.0;
constexpr double kCriterion5BudgetS = 60.0;
constexpr double kOverlapRatio = 0.75;
constexpr double kBalancedRatio = 0.8;
constexpr double kCgRtol = 1e-6;
constexpr index_t kCgIterationLimit = 200;
constexpr int kTimedRuns = 5;
constexpr int kStatsWorkers = 4;

struct Outcome {
    bool pass = true;
    std::string detail;
    // Hardware threads the measured configuration occupies; 0 for exact checks.
    unsigned cores_used = 0;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double ms(Nanos d) { return std::chrono::duration<double, std::milli>(d).count(); }

template <class T>
T median_of(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

ExecConfig cfg(ExecModel m, int ranks, int threads) {
    ExecConfig c;
    c.model = m;
    c.nranks = ranks;
    c.threads_per_rank = threads;
    return c;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    long configs = 0;
    for (int m = 0; m < 100; ++m) {
        const auto n = static_cast<index_t>(1 + rng() % 512);
        const double density = 0.01 + 0.09 * std::uniform_real_distribution<double>(0, 1)(rng);
        const auto a = gen_random_spd(n, density, rng());
        const auto x = oracle::random_vector(static_cast<std::size_t>(n), rng());
        const auto expect = spmv_serial(a, x);
        for (const auto model : {ExecModel::serial, ExecModel::vector, ExecModel::task,
                                 ExecModel::task_balanced}) {
            for (const int ranks : {1, 2, 3, 4}) {
                for (const int threads : {2, 3, 4, 8}) {
                    auto ctx = create_context(a, cfg(model, ranks, threads));
                    ++configs;
                    if (!oracle::bitwise_equal(ctx->mat_mult(x), expect)) {
                        return {false, "matrix " + std::to_string(m) + " " +
                                           std::string(to_string(model)) + " " +
                                           std::to_string(ranks) + "x" + std::to_string(threads) +
                                           " differs from spmv_serial"};
                    }
                }
            }
        }
    }
    const double s = seconds_since(t0);
    return {s < kCriterion1BudgetS,
            std::to_string(configs) + " configs bitwise equal in " + fmt("%.1f s (limit %.0f s)", s, kCriterion1BudgetS)};
}

Outcome two_phase_identity() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2002);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<index_t>(1 + rng() % 300);
        const auto a = gen_random_spd(n, 0.01 + 0.01 * static_cast<double>(rng() % 10), rng());
        const int nranks = 1 + static_cast<int>(rng() % 8);
        // Random cut points, empty ranks allowed.
        std::vector<index_t> cuts{0, n};
        for (int r = 1; r < nranks; ++r) cuts.push_back(static_cast<index_t>(rng() % (n + 1)));
        std::sort(cuts.begin(), cuts.end());
        std::vector<RowRange> ranges;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) ranges.push_back({cuts[k], cuts[k + 1]});

        const auto x = oracle::random_vector(static_cast<std::size_t>(n), rng());
        std::vector<double> y(static_cast<std::size_t>(n));
        std::vector<RankLayout> layouts;
        for (int r = 0; r < static_cast<int>(ranges.size()); ++r) {
            const auto l = build_rank_layout(a, ranges, r);
            std::vector<double> ghost;
            for (const index_t g : l.ghost_cols) ghost.push_back(x[g]);
            two_phase_multiply(l, std::span<const double>(x).subspan(l.own.begin, l.own.size()),
                               ghost, std::span<double>(y).subspan(l.own.begin, l.own.size()));
            layouts.push_back(l);
        }
        if (!oracle::bitwise_equal(y, spmv_serial(a, x))) {
            return {false, "trial " + std::to_string(trial) + " differs from whole-matrix multiply"};
        }
        if (!(reassemble(layouts, n) == a)) {
            return {false, "trial " + std::to_string(trial) + " blocks do not reassemble to A"};
        }
    }
    const double s = seconds_since(t0);
    return {s < kCriterion2BudgetS, "50 decompositions exact in " + fmt("%.2f s", s)};
}

Outcome partitioner_bracket() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(3003);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(1 + rng() % 12);
        const int workers = 1 + static_cast<int>(rng() % 4);
        std::vector<index_t> w(n);
        for (auto& v : w) v = static_cast<index_t>(rng() % 25);
        const auto g = greedy_partition(w, workers);
        const index_t opt = oracle::optimal_max_load(w, workers);
        const index_t heaviest = *std::max_element(w.begin(), w.end());
        index_t prev = balance_stats(g, w).max_load;
        for (int sweeps = 1; sweeps <= static_cast<int>(n) + 1; ++sweeps) {
            const index_t cur = balance_stats(diffuse(g, w, sweeps), w).max_load;
            if (cur > prev) return {false, "diffusion increased max load on trial " + std::to_string(trial)};
            prev = cur;
        }
        const index_t d = balance_stats(diffuse(g, w), w).max_load;
        if (d < opt || d > opt + heaviest) {
            return {false, "trial " + std::to_string(trial) + " max load " + std::to_string(d) +
                               " outside [" + std::to_string(opt) + ", " + std::to_string(opt + heaviest) + "]"};
        }
    }
    const double s = seconds_since(t0);
    return {s < kCriterion3BudgetS, "1000 profiles within bracket, diffusion monotone, " + fmt("%.2f s", s)};
}

Outcome worked_fixtures() {
    const std::vector<index_t> a{3, 1, 1, 3};
    const auto ga = balance_stats(greedy_partition(a, 2), a);
    const std::vector<index_t> b{2, 2, 5, 1, 1, 1};
    const auto gb = greedy_partition(b, 2);
    const index_t before = balance_stats(gb, b).max_load;
    const index_t after = balance_stats(diffuse(gb, b), b).max_load;
    const bool ok = ga.loads == std::vector<index_t>{4, 4} && oracle::optimal_max_load(a, 2) == 4 &&
                    before == 9 && after == 8 && oracle::optimal_max_load(b, 2) == 8;
    return {ok, "greedy([3,1,1,3],2) loads (" + std::to_string(ga.loads[0]) + "," +
                    std::to_string(ga.loads[1]) + "); diffuse([2,2,5,1,1,1],2) max " +
                    std::to_string(before) + " -> " + std::to_string(after) + " (enumerated optimum " +
                    std::to_string(oracle::optimal_max_load(b, 2)) + ")"};
}

// Mean wall time of `count` multiplies.
Nanos mean_multiply(MultContext& ctx, const std::vector<double>& x, std::vector<double>& y, int count) {
    const auto t0 = Clock::now();
    for (int k = 0; k < count; ++k) ctx.mat_mult(x, y);
    return (Clock::now() - t0) / count;
}

Outcome overlap() {
    const auto t0 = Clock::now();
    const auto a = gen_extruded_laplacian(16, 16, 32);
    const auto x = oracle::random_vector(static_cast<std::size_t>(a.nrows()), 5);
    std::vector<double> y(x.size());

    // L: diag-phase time of the vector model with no injected latency.
    Nanos diag{0};
    {
        auto probe = create_context(a, cfg(ExecModel::vector, 2, 4));
        for (int k = 0; k < 5; ++k) probe->mat_mult(x, y);
        std::vector<Nanos> samples;
        for (int k = 0; k < 51; ++k) samples.push_back(probe->mult_phase_timings(x, y).diag_max());
        diag = median_of(samples);
    }
    Nanos base_vec{0}, base_task{0};
    {
        auto v0 = create_context(a, cfg(ExecModel::vector, 2, 4));
        auto t0c = create_context(a, cfg(ExecModel::task, 2, 4));
        mean_multiply(*v0, x, y, 5);
        mean_multiply(*t0c, x, y, 5);
        base_vec = mean_multiply(*v0, x, y, 40);
        base_task = mean_multiply(*t0c, x, y, 40);
    }
    const LatencyModel lat{diag, 0ns, ProgressMode::active_wait};
    auto vec = create_context(a, cfg(ExecModel::vector, 2, 4), std::make_shared<Fabric>(2, lat));
    auto task = create_context(a, cfg(ExecModel::task, 2, 4), std::make_shared<Fabric>(2, lat));
    mean_multiply(*vec, x, y, 5);
    mean_multiply(*task, x, y, 5);
    std::vector<Nanos> tv, tt;
    for (int run = 0; run < kTimedRuns; ++run) {
        tv.push_back(mean_multiply(*vec, x, y, 40));
        tt.push_back(mean_multiply(*task, x, y, 40));
    }
    const double ratio = ms(median_of(tt)) / ms(median_of(tv));
    const double s = seconds_since(t0);
    return {ratio <= kOverlapRatio && s < kCriterion5BudgetS,
            fmt("L = %.3f ms; median task %.3f ms, vector %.3f ms; ratio %.3f", ms(diag), ms(median_of(tt)),
                ms(median_of(tv)), ratio) +
                fmt(" (limit %.2f); zero-latency task %.3f ms, vector %.3f ms; %.1f s", kOverlapRatio,
                    ms(base_task), ms(base_vec), s),
            8};
}

Outcome balanced_threads() {
    const auto a = gen_arrowhead(4096);
    const auto x = oracle::random_vector(4096, 6);
    std::vector<double> y(x.size());
    auto equal = create_context(a, cfg(ExecModel::task, 1, 4));
    auto balanced = create_context(a, cfg(ExecModel::task_balanced, 1, 4));
    // Per-thread CPU time, summed over a batch of multiplies per run.
    const auto batch = [&](MultContext& ctx) {
        Nanos total{0};
        for (int k = 0; k < 100; ++k) total += ctx.mult_phase_timings(x, y).ranks[0].diag_max_thread_cpu();
        return total;
    };
    batch(*equal);
    batch(*balanced);
    std::vector<Nanos> te, tb;
    for (int run = 0; run < kTimedRuns; ++run) {
        te.push_back(batch(*equal));
        tb.push_back(batch(*balanced));
    }
    const double ratio = ms(median_of(tb)) / ms(median_of(te));

    const std::vector<PartitionScheme> schemes{PartitionScheme::equal_rows, PartitionScheme::greedy,
                                               PartitionScheme::greedy_diffuse};
    const auto rows = partition_stats(a, 1, kStatsWorkers, schemes);
    double imb[3] = {0, 0, 0};
    for (const auto& r : rows)
        if (r.block == Block::diag) imb[static_cast<int>(r.scheme)] = r.stats.imbalance;
    const bool ordered = imb[2] <= imb[1] && imb[1] <= imb[0];
    return {ratio <= kBalancedRatio && ordered,
            fmt("max-thread diag time ratio %.3f (limit %.2f); ", ratio, kBalancedRatio) +
                fmt("W=4 imbalance diffuse %.3f <= greedy %.3f <= equal-rows %.3f", imb[2], imb[1], imb[0]),
            4};
}

Outcome cg_protocol() {
    const auto a = gen_extruded_laplacian(8, 8, 16);
    const std::vector<double> b(static_cast<std::size_t>(a.nrows()), 1.0);
    auto ctx = create_context(a, cfg(ExecModel::task_balanced, 2, 4));
    const auto res = cg_solve(*ctx, b, kCgRtol);
    auto ax = oracle::dense_multiply(oracle::to_dense(a), res.x);
    double rn = 0, bn = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        rn += (b[i] - ax[i]) * (b[i] - ax[i]);
        bn += b[i] * b[i];
    }
    const double true_rel = std::sqrt(rn / bn);
    const auto ref = oracle::reference_pcg(a, b, kCgRtol, kDefaultMaxIterations);
    const bool solve_ok = res.report.converged && res.report.iterations < kCgIterationLimit &&
                          true_rel <= kCgRtol && ref.converged &&
                          std::abs(res.report.iterations - ref.iterations) <= 2;

    auto tiny = create_context(gen_tridiagonal(64), cfg(ExecModel::vector, 2, 2));
    const auto capped = cg_solve(*tiny, std::vector<double>(64, 1.0), 1e-300, 7);
    const bool cap_ok = !capped.report.converged && capped.report.iterations == 7 &&
                        kDefaultMaxIterations == 10'000;
    return {solve_ok && cap_ok,
            "iterations " + std::to_string(res.report.iterations) + " (reference " +
                std::to_string(ref.iterations) + "), true residual " + fmt("%.2e", true_rel) +
                "; low cap 7 honored: " + (cap_ok ? "yes" : "no") + ", default cap " +
                std::to_string(kDefaultMaxIterations)};
}

Outcome efficiency_accounting() {
    const auto a = gen_extruded_laplacian(8, 8, 8);
    std::vector<BenchRecord> rows;
    for (const auto& c : {cfg(ExecModel::serial, 1, 1), cfg(ExecModel::vector, 2, 2), cfg(ExecModel::task, 2, 4),
                          cfg(ExecModel::task_balanced, 4, 2)}) {
        SpmvBenchOptions o;
        o.config = c;
        o.reps = 20;
        rows.push_back(run_spmv_bench(a, "lap888", o));
    }
    apply_efficiency(rows, 0);
    bool flops_equal = true;
    for (const auto& r : rows) flops_equal = flops_equal && r.flops == 2.0 * a.nnz() * 20;
    const bool base_one = rows[0].efficiency && *rows[0].efficiency == 1.0;
    return {flops_equal && base_one, fmt("baseline efficiency %.17g; flops %.0f in all %g configs",
                                         rows[0].efficiency.value_or(-1), rows[0].flops,
                                         static_cast<double>(rows.size()))};
}

Outcome matrix_market() {
    std::mt19937_64 rng(9009);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = static_cast<index_t>(1 + rng() % 40);
        const auto n = static_cast<index_t>(1 + rng() % 40);
        auto a = oracle::random_sparse(m, n, 0.2, rng());
        // Push values across the exponent range, including subnormals.
        std::vector<Triplet> t;
        for (index_t i = 0; i < a.nrows(); ++i) {
            const auto c = a.row_cols(i);
            const auto v = a.row_values(i);
            for (std::size_t k = 0; k < c.size(); ++k)
                t.push_back({i, c[k], std::ldexp(v[k], static_cast<int>(rng() % 2100) - 1070)});
        }
        a = csr_from_triplets(t, m, n);
        std::istringstream text(write_matrix_market(a));
        const auto back = read_matrix_market(text);
        if (!(back == a) || !oracle::bitwise_equal(back.values(), a.values())) {
            return {false, "round trip " + std::to_string(trial) + " not bit-exact"};
        }
    }
    std::istringstream sym("%%MatrixMarket matrix coordinate real symmetric\n"
                           "3 3 4\n1 1 4\n2 1 -1.5\n3 2 2.25e-3\n3 3 5\n");
    const auto s = read_matrix_market(sym);
    const std::vector<Triplet> full{{0, 0, 4},       {0, 1, -1.5},    {1, 0, -1.5},
                                    {1, 2, 2.25e-3}, {2, 1, 2.25e-3}, {2, 2, 5}};
    const auto expect = csr_from_triplets(full, 3, 3);
    if (!(s == expect)) return {false, "symmetric fixture expanded incorrectly"};
    return {true, "20 random round trips bit-exact; symmetric fixture expands to 6 entries"};
}

}  // namespace

int main() {
    tighten_timer_slack();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"two-phase identity", two_phase_identity},
        {"partitioner optimality bracket", partitioner_bracket},
        {"worked partition fixtures", worked_fixtures},
        {"overlap demonstration", overlap},
        {"balanced-thread benefit", balanced_threads},
        {"cg protocol", cg_protocol},
        {"efficiency accounting", efficiency_accounting},
        {"matrix market fixtures", matrix_market},
    };
    // Exit 77 (reported as skipped) when the only failures are timing criteria
    // whose configuration needs more hardware threads than this machine has.
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    int failures = 0;
    int undersized = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::string note;
        if (!o.pass && o.cores_used > hw) {
            ++undersized;
            note = " [configuration uses " + std::to_string(o.cores_used) + " threads, machine has " +
                   std::to_string(hw) + "]";
        }
        std::printf("%s [%zu] %s: %s%s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str(), note.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    if (failures == 0) return 0;
    return failures == undersized ? 77 : 1;
}
