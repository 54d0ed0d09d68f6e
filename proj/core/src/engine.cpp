#include "hspmv/engine.hpp"

#include <algorithm>
#include <ctime>
#include <stdexcept>
#include <string>

namespace hspmv {
namespace {

constexpr int kScatterTag = 7;

Nanos thread_cpu_now() {
    timespec ts{};
    ::clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return std::chrono::seconds(ts.tv_sec) + Nanos(ts.tv_nsec);
}

bool is_task(ExecModel m) { return m == ExecModel::task || m == ExecModel::task_balanced; }

class BusyGuard {
  public:
    explicit BusyGuard(std::atomic<bool>& flag) : flag_(flag) {
        if (flag_.exchange(true)) {
            throw std::logic_error("mat_mult is not reentrant on one context");
        }
    }
    ~BusyGuard() { flag_.store(false); }
    BusyGuard(const BusyGuard&) = delete;
    BusyGuard& operator=(const BusyGuard&) = delete;

  private:
    std::atomic<bool>& flag_;
};

}  // namespace

std::string_view to_string(ExecModel m) {
    switch (m) {
        case ExecModel::serial: return "serial";
        case ExecModel::vector: return "vector";
        case ExecModel::task: return "task";
        case ExecModel::task_balanced: return "task-balanced";
    }
    return "?";
}

ExecModel parse_exec_model(std::string_view name) {
    if (name == "serial") return ExecModel::serial;
    if (name == "vector") return ExecModel::vector;
    if (name == "task") return ExecModel::task;
    if (name == "task-balanced") return ExecModel::task_balanced;
    throw std::invalid_argument("unknown execution model '" + std::string(name) + "'");
}

int ExecConfig::workers() const {
    switch (model) {
        case ExecModel::serial: return 1;
        case ExecModel::vector: return threads_per_rank;
        case ExecModel::task:
        case ExecModel::task_balanced: return threads_per_rank - 1;
    }
    return 1;
}

int ExecConfig::cores() const { return model == ExecModel::serial ? 1 : nranks * threads_per_rank; }

void validate(const ExecConfig& cfg) {
    if (cfg.nranks < 1) {
        throw std::invalid_argument("nranks must be >= 1");
    }
    if (cfg.threads_per_rank < 1) {
        throw std::invalid_argument("threads_per_rank must be >= 1");
    }
    if (is_task(cfg.model) && cfg.threads_per_rank < 2) {
        throw std::invalid_argument(
            "task models need threads_per_rank >= 2 (one communication thread plus workers)");
    }
}

const ThreadPartition& PartitionCache::get(int rank, Block block, int workers,
                                           PartitionScheme scheme,
                                           std::span<const index_t> row_weights) {
    auto& slot = entries_[{rank, block, workers, scheme}];
    if (!slot) {
        slot = std::make_unique<ThreadPartition>(make_partition(scheme, row_weights, workers));
        ++builds_;
    }
    return *slot;
}

Nanos RankPhaseTimes::diag_max_thread_cpu() const {
    return diag_thread_cpu.empty()
               ? Nanos::zero()
               : *std::max_element(diag_thread_cpu.begin(), diag_thread_cpu.end());
}

Nanos MultTimings::diag_max() const {
    Nanos m{0};
    for (const auto& r : ranks) {
        m = std::max(m, r.diag);
    }
    return m;
}

MultContext::MultContext(const CsrMatrix& a, ExecConfig cfg, std::shared_ptr<Fabric> fabric)
    : cfg_(cfg), fabric_(std::move(fabric)), nrows_(a.nrows()), nnz_(a.nnz()) {
    validate(cfg_);
    if (a.nrows() != a.ncols()) {
        throw StructuralError("distributed multiply requires a square matrix");
    }
    if (!fabric_) {
        fabric_ = std::make_shared<Fabric>(cfg_.nranks, LatencyModel{});
    }
    if (fabric_->nranks() != cfg_.nranks) {
        throw std::invalid_argument("fabric has " + std::to_string(fabric_->nranks()) +
                                    " ranks, config asks for " + std::to_string(cfg_.nranks));
    }
    if (cfg_.model == ExecModel::serial) {
        serial_matrix_ = a;
    }

    if (cfg_.weighted_decomposition) {
        const auto weights = a.row_nnz_profile();
        ranges_ = decompose_rows(a.nrows(), cfg_.nranks, std::span<const index_t>(weights));
    } else {
        ranges_ = decompose_rows(a.nrows(), cfg_.nranks);
    }

    ranks_.resize(static_cast<std::size_t>(cfg_.nranks));
    posted_ = std::make_unique<std::atomic<bool>[]>(static_cast<std::size_t>(cfg_.nranks));
    std::vector<RankLayout> layouts;
    for (int r = 0; r < cfg_.nranks; ++r) {
        layouts.push_back(build_rank_layout(a, ranges_, r));
    }
    plan_ = build_scatter_plan(layouts);

    const PartitionScheme scheme = cfg_.model == ExecModel::task_balanced
                                       ? PartitionScheme::greedy_diffuse
                                       : PartitionScheme::equal_rows;
    const int workers = cfg_.workers();
    const int threads = cfg_.model == ExecModel::serial ? 0 : cfg_.threads_per_rank;
    for (int r = 0; r < cfg_.nranks; ++r) {
        RankState& rs = ranks_[r];
        rs.layout = std::move(layouts[r]);
        const index_t n = rs.layout.own.size();
        // Deferred rows are summed entirely in the off-diagonal phase.
        rs.diag_work.resize(static_cast<std::size_t>(n));
        rs.off_work.resize(static_cast<std::size_t>(n));
        rs.deferred.resize(static_cast<std::size_t>(n));
        for (index_t i = 0; i < n; ++i) {
            const bool deferred = is_deferred_row(rs.layout, i);
            rs.deferred[i] = deferred ? 1 : 0;
            rs.any_deferred = rs.any_deferred || deferred;
            rs.diag_work[i] = deferred ? 0 : rs.layout.diag.row_nnz(i);
            rs.off_work[i] = rs.layout.off.row_nnz(i) + (deferred ? rs.layout.diag.row_nnz(i) : 0);
        }
        rs.diag_part = &cache_.get(r, Block::diag, workers, scheme, rs.diag_work);
        rs.off_part = &cache_.get(r, Block::off, workers, scheme, rs.off_work);
        rs.ghost.assign(rs.layout.ghost_cols.size(), 0.0);

        if (threads > 0) {
            const auto t = static_cast<std::size_t>(threads);
            rs.diag_begin.resize(t);
            rs.diag_end.resize(t);
            rs.off_begin.resize(t);
            rs.off_end.resize(t);
            rs.thread_end.resize(t);
            rs.diag_cpu.resize(t);
            rs.off_cpu.resize(t);
            rs.team = std::make_unique<ThreadTeam>(threads);
        }
    }
}

MultContext::~MultContext() = default;

void MultContext::run_ranks(const std::function<void(int, int)>& job) {
    for (int r = 0; r < cfg_.nranks; ++r) {
        posted_[r].store(false, std::memory_order_relaxed);
    }
    for (int r = 0; r < cfg_.nranks; ++r) {
        ranks_[r].team->start([&job, r](int tid) { job(r, tid); });
    }
    std::exception_ptr first;
    for (int r = 0; r < cfg_.nranks; ++r) {
        try {
            ranks_[r].team->wait();
        } catch (...) {
            if (!first) first = std::current_exception();
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

void MultContext::post_exchange(RankState& rs, std::span<const double> x) {
    const int r = rs.layout.rank;
    const RankPlan& rp = plan_.ranks[r];
    rs.handles.clear();
    for (const auto& recv : rp.recvs) {
        rs.handles.push_back(fabric_->post_recv(r, recv.peer, recv.indices.size(), kScatterTag));
    }
    for (const auto& send : rp.sends) {
        std::vector<double> payload;
        payload.reserve(send.indices.size());
        for (const index_t g : send.indices) {
            payload.push_back(x[g]);
        }
        rs.handles.push_back(fabric_->post_send(r, send.peer, std::move(payload), kScatterTag));
    }
}

void MultContext::complete_exchange(RankState& rs) {
    const RankPlan& rp = plan_.ranks[rs.layout.rank];
    auto payloads = fabric_->wait_all(rs.handles);
    // Receives were posted first, so payloads[k] belongs to rp.recvs[k].
    for (std::size_t k = 0; k < rp.recvs.size(); ++k) {
        const auto& pos = rp.recv_ghost_pos[k];
        for (std::size_t e = 0; e < pos.size(); ++e) {
            rs.ghost[pos[e]] = payloads[k][e];
        }
    }
    rs.handles.clear();
}

void MultContext::diag_rows(RankState& rs, int worker, int tid, std::span<const double> x,
                            std::span<double> y) {
    const RankLayout& l = rs.layout;
    const auto x_local = x.subspan(l.own.begin, l.own.size());
    rs.diag_begin[tid] = Clock::now();
    const Nanos cpu0 = thread_cpu_now();
    const index_t b = rs.diag_part->begin(worker);
    const index_t e = rs.diag_part->end(worker);
    const index_t* offsets = l.diag.row_offsets().data();
    const index_t* cols = l.diag.col_indices().data();
    const double* vals = l.diag.values().data();
    const double* xl = x_local.data();
    const std::uint8_t* deferred = rs.deferred.data();
    double* out = y.data() + l.own.begin;
    if (rs.any_deferred) {
        for (index_t i = b; i < e; ++i) {
            if (deferred[i]) continue;
            double sum = 0.0;
            for (index_t k = offsets[i]; k < offsets[i + 1]; ++k) {
                sum += vals[k] * xl[cols[k]];
            }
            out[i] = sum;
        }
    } else {
        index_t k = offsets[b];
        for (index_t i = b; i < e; ++i) {
            const index_t stop = offsets[i + 1];
            double sum = 0.0;
            for (; k < stop; ++k) {
                sum += vals[k] * xl[cols[k]];
            }
            out[i] = sum;
        }
    }
    if (track_) {
        for (index_t i = b; i < e; ++i) {
            if (!deferred[i]) diag_writes_[l.own.begin + i].fetch_add(1, std::memory_order_relaxed);
        }
    }
    rs.diag_cpu[tid] = thread_cpu_now() - cpu0;
    rs.diag_end[tid] = Clock::now();
}

void MultContext::off_rows(RankState& rs, int worker, int tid, std::span<const double> x,
                           std::span<double> y) {
    const RankLayout& l = rs.layout;
    const auto x_local = x.subspan(l.own.begin, l.own.size());
    rs.off_begin[tid] = Clock::now();
    const Nanos cpu0 = thread_cpu_now();
    const index_t b = rs.off_part->begin(worker);
    const index_t e = rs.off_part->end(worker);
    for (index_t i = b; i < e; ++i) {
        double& out = y[l.own.begin + i];
        out = finish_row(l, i, out, x_local, rs.ghost);
        if (track_) {
            off_writes_[l.own.begin + i].fetch_add(1, std::memory_order_relaxed);
        }
    }
    rs.off_cpu[tid] = thread_cpu_now() - cpu0;
    rs.off_end[tid] = Clock::now();
}

void MultContext::rank_job(int rank, int tid, std::span<const double> x, std::span<double> y) {
    RankState& rs = ranks_[rank];
    ThreadTeam& team = *rs.team;
    if (cfg_.model == ExecModel::vector) {
        if (tid == 0) {
            rs.post_begin = Clock::now();
            post_exchange(rs, x);
            rs.post_end = Clock::now();
        }
        diag_rows(rs, tid, tid, x, y);
        team.barrier();
        if (tid == 0) {
            rs.wait_begin = Clock::now();
            complete_exchange(rs);
            rs.wait_end = Clock::now();
        }
        team.barrier();
        off_rows(rs, tid, tid, x, y);
    } else {
        std::atomic<bool>& posted = posted_[rank];
        if (tid == 0) {
            rs.post_begin = Clock::now();
            post_exchange(rs, x);
            posted.store(true, std::memory_order_release);
            posted.notify_all();
            rs.post_end = rs.wait_begin = Clock::now();
            complete_exchange(rs);
            rs.wait_end = Clock::now();
        } else {
            // Workers start once the exchange is posted.
            posted.wait(false, std::memory_order_acquire);
            diag_rows(rs, tid - 1, tid, x, y);
        }
        team.barrier();
        if (tid != 0) {
            off_rows(rs, tid - 1, tid, x, y);
        }
    }
    rs.thread_end[tid] = Clock::now();
}

MultTimings MultContext::mult_phase_timings(std::span<const double> x, std::span<double> y) {
    if (static_cast<index_t>(x.size()) != nrows_ || static_cast<index_t>(y.size()) != nrows_) {
        throw StructuralError("mat_mult: vector length " + std::to_string(x.size()) + "/" +
                              std::to_string(y.size()) + " does not match dimension " +
                              std::to_string(nrows_));
    }
    BusyGuard guard(busy_);
    MultTimings out;
    out.ranks.resize(ranks_.size());

    if (cfg_.model == ExecModel::serial) {
        const auto t0 = Clock::now();
        const Nanos cpu0 = thread_cpu_now();
        spmv_serial(serial_matrix_, x, y);
        const Nanos cpu = thread_cpu_now() - cpu0;
        out.total = Clock::now() - t0;
        if (track_) {
            for (index_t i = 0; i < nrows_; ++i) {
                off_writes_[i].fetch_add(1, std::memory_order_relaxed);
            }
        }
        out.ranks[0].diag = out.ranks[0].total = out.total;
        out.ranks[0].diag_thread_cpu = {cpu};
        return out;
    }

    const auto t0 = Clock::now();
    run_ranks([&](int r, int tid) { rank_job(r, tid, x, y); });
    out.total = Clock::now() - t0;

    const bool task = is_task(cfg_.model);
    const int first_worker = task ? 1 : 0;
    for (std::size_t r = 0; r < ranks_.size(); ++r) {
        const RankState& rs = ranks_[r];
        RankPhaseTimes& pt = out.ranks[r];
        const auto threads = rs.diag_begin.size();
        pt.scatter_post = rs.post_end - rs.post_begin;
        pt.wait = rs.wait_end - rs.wait_begin;
        auto diag_b = Clock::time_point::max(), off_b = Clock::time_point::max();
        auto diag_e = Clock::time_point::min(), off_e = Clock::time_point::min();
        auto end = Clock::time_point::min();
        for (std::size_t t = 0; t < threads; ++t) {
            end = std::max(end, rs.thread_end[t]);
            if (static_cast<int>(t) < first_worker) continue;
            diag_b = std::min(diag_b, rs.diag_begin[t]);
            diag_e = std::max(diag_e, rs.diag_end[t]);
            off_b = std::min(off_b, rs.off_begin[t]);
            off_e = std::max(off_e, rs.off_end[t]);
            pt.diag_thread_cpu.push_back(rs.diag_cpu[t]);
            pt.off_thread_cpu.push_back(rs.off_cpu[t]);
        }
        pt.diag = diag_e - diag_b;
        pt.off = off_e - off_b;
        pt.total = end - t0;
    }
    return out;
}

void MultContext::mat_mult(std::span<const double> x, std::span<double> y) {
    mult_phase_timings(x, y);
}

DenseVector MultContext::mat_mult(std::span<const double> x) {
    DenseVector y(static_cast<std::size_t>(nrows_));
    mat_mult(x, y);
    return y;
}

DenseVector MultContext::diagonal() const {
    DenseVector d(static_cast<std::size_t>(nrows_), 0.0);
    for (const auto& rs : ranks_) {
        const auto local = rs.layout.diag.diagonal();
        std::copy(local.begin(), local.end(), d.begin() + rs.layout.own.begin);
    }
    return d;
}

void MultContext::set_ownership_tracking(bool on) {
    track_ = on;
    if (on) {
        const auto n = static_cast<std::size_t>(nrows_);
        diag_writes_ = std::make_unique<std::atomic<std::uint32_t>[]>(n);
        off_writes_ = std::make_unique<std::atomic<std::uint32_t>[]>(n);
        for (std::size_t i = 0; i < n; ++i) {
            diag_writes_[i].store(0);
            off_writes_[i].store(0);
        }
    }
}

OwnershipCounts MultContext::ownership() const {
    OwnershipCounts c;
    if (!diag_writes_) {
        return c;
    }
    c.diag.resize(static_cast<std::size_t>(nrows_));
    c.off.resize(static_cast<std::size_t>(nrows_));
    for (index_t i = 0; i < nrows_; ++i) {
        c.diag[i] = diag_writes_[i].load();
        c.off[i] = off_writes_[i].load();
    }
    return c;
}

void MultContext::parallel_rows(const std::function<void(int, index_t, index_t)>& fn) {
    if (cfg_.model == ExecModel::serial) {
        for (int r = 0; r < cfg_.nranks; ++r) {
            fn(r, ranges_[r].begin, ranges_[r].end);
        }
        return;
    }
    const int first_worker = is_task(cfg_.model) ? 1 : 0;
    run_ranks([&](int r, int tid) {
        if (tid < first_worker) return;
        const auto& part = *ranks_[r].diag_part;
        const index_t base = ranges_[r].begin;
        fn(r, base + part.begin(tid - first_worker), base + part.end(tid - first_worker));
    });
}

std::vector<double> MultContext::rank_partials(const std::function<double(int, RowRange)>& fn) {
    std::vector<double> out(static_cast<std::size_t>(cfg_.nranks), 0.0);
    if (cfg_.model == ExecModel::serial) {
        for (int r = 0; r < cfg_.nranks; ++r) {
            out[r] = fn(r, ranges_[r]);
        }
        return out;
    }
    run_ranks([&](int r, int tid) {
        if (tid == 0) {
            out[r] = fn(r, ranges_[r]);
        }
    });
    return out;
}

std::unique_ptr<MultContext> create_context(const CsrMatrix& a, const ExecConfig& cfg,
                                            std::shared_ptr<Fabric> fabric) {
    return std::make_unique<MultContext>(a, cfg, std::move(fabric));
}

}  // namespace hspmv
