/// @file engine.hpp
/// @brief Distributed SpMV over per-rank thread teams and the message fabric.
///
/// Each rank multiplies in two phases: the diagonal block against its own
/// input entries, then the off-diagonal block against ghost entries that were
/// gathered from neighbours through the fabric. The execution model decides
/// how a rank's threads share that work:
///
///  - serial:        whole-matrix spmv_serial on the calling thread.
///  - vector:        all T threads compute; thread 0 also posts the exchange
///                   and, after the diagonal phase, waits for it. Latency is
///                   not hidden.
///  - task:          thread 0 is a dedicated communication thread that posts,
///                   waits and unpacks while threads 1..T-1 run the diagonal
///                   phase; workers then run the off-diagonal phase.
///  - task-balanced: as task, but worker row blocks are cut by nonzero count
///                   (greedy + diffusion) instead of by row count.
///
/// All models produce output bitwise equal to spmv_serial: every row is
/// accumulated in ascending global column order (see two_phase_multiply).

#ifndef HSPMV_ENGINE_HPP
#define HSPMV_ENGINE_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "hspmv/balance.hpp"
#include "hspmv/csr.hpp"
#include "hspmv/fabric.hpp"
#include "hspmv/layout.hpp"
#include "hspmv/thread_team.hpp"

namespace hspmv {

enum class ExecModel { serial, vector, task, task_balanced };

std::string_view to_string(ExecModel m);
ExecModel parse_exec_model(std::string_view name);

struct ExecConfig {
    ExecModel model = ExecModel::serial;
    int nranks = 1;
    int threads_per_rank = 1;
    /// Cut rank row ranges by nonzero count instead of row count.
    bool weighted_decomposition = false;

    /// Compute threads per rank: T for vector, T - 1 for task models, 1 for serial.
    int workers() const;
    /// Cores the configuration occupies (1 for serial).
    int cores() const;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const ExecConfig& cfg);

enum class Block { diag, off };

/// Thread partitions keyed by (rank, block, worker count, scheme). Entries are
/// built once and never invalidated; the block matrices are immutable.
class PartitionCache {
  public:
    const ThreadPartition& get(int rank, Block block, int workers, PartitionScheme scheme,
                               std::span<const index_t> row_weights);
    /// How many partitions have been computed (cache misses).
    std::size_t builds() const { return builds_; }

  private:
    std::map<std::tuple<int, Block, int, PartitionScheme>, std::unique_ptr<ThreadPartition>>
        entries_;
    std::size_t builds_ = 0;
};

struct RankPhaseTimes {
    Nanos scatter_post{0};
    Nanos diag{0};
    Nanos wait{0};
    Nanos off{0};
    Nanos total{0};
    /// CPU time each compute thread spent in its share of the phase.
    std::vector<Nanos> diag_thread_cpu;
    std::vector<Nanos> off_thread_cpu;

    Nanos diag_max_thread_cpu() const;
};

struct MultTimings {
    std::vector<RankPhaseTimes> ranks;
    Nanos total{0};

    /// Longest diagonal phase across ranks.
    Nanos diag_max() const;
};

/// Per-row write counts, recorded only while ownership tracking is on.
struct OwnershipCounts {
    std::vector<std::uint32_t> diag;
    std::vector<std::uint32_t> off;
};

class MultContext {
  public:
    /// Builds the decomposition, layouts, scatter plan and cached thread
    /// partitions, then spawns one thread team per rank. `fabric` may be null,
    /// in which case a zero-latency fabric is created.
    MultContext(const CsrMatrix& a, ExecConfig cfg, std::shared_ptr<Fabric> fabric);
    ~MultContext();
    MultContext(const MultContext&) = delete;
    MultContext& operator=(const MultContext&) = delete;

    const ExecConfig& config() const { return cfg_; }
    int workers() const { return cfg_.workers(); }
    index_t nrows() const { return nrows_; }
    index_t nnz() const { return nnz_; }
    const std::vector<RowRange>& ranges() const { return ranges_; }
    const RankLayout& layout(int rank) const { return ranks_[rank].layout; }
    const ScatterPlan& plan() const { return plan_; }
    const Fabric& fabric() const { return *fabric_; }
    /// Main diagonal of the global matrix, assembled from the diagonal blocks.
    DenseVector diagonal() const;

    const ThreadPartition& diag_partition(int rank) const { return *ranks_[rank].diag_part; }
    const ThreadPartition& off_partition(int rank) const { return *ranks_[rank].off_part; }
    /// Per-row work of each phase, the weights the partitions were cut on.
    std::span<const index_t> diag_work(int rank) const { return ranks_[rank].diag_work; }
    std::span<const index_t> off_work(int rank) const { return ranks_[rank].off_work; }
    std::size_t partition_builds() const { return cache_.builds(); }

    DenseVector mat_mult(std::span<const double> x);
    void mat_mult(std::span<const double> x, std::span<double> y);
    /// Same product, plus monotonic-clock phase durations per rank.
    MultTimings mult_phase_timings(std::span<const double> x, std::span<double> y);

    void set_ownership_tracking(bool on);
    OwnershipCounts ownership() const;

    /// Runs fn(rank, begin, end) over global row blocks: each rank's compute
    /// threads take their diagonal-phase partition. Serial runs it once per
    /// rank on the caller.
    void parallel_rows(const std::function<void(int, index_t, index_t)>& fn);
    /// One value per rank, each computed by a single thread of that rank over
    /// the rank's own rows; ranks run concurrently.
    std::vector<double> rank_partials(const std::function<double(int, RowRange)>& fn);

  private:
    struct RankState {
        RankLayout layout;
        std::vector<index_t> diag_work;
        std::vector<index_t> off_work;
        std::vector<std::uint8_t> deferred;  // 1 for rows summed wholly in the off phase
        bool any_deferred = false;
        const ThreadPartition* diag_part = nullptr;
        const ThreadPartition* off_part = nullptr;
        DenseVector ghost;
        std::vector<MessageHandle> handles;
        std::unique_ptr<ThreadTeam> team;

        // Timing scratch, one slot per thread.
        std::vector<Clock::time_point> diag_begin, diag_end, off_begin, off_end, thread_end;
        std::vector<Nanos> diag_cpu, off_cpu;
        Clock::time_point post_begin, post_end, wait_begin, wait_end;
    };

    void run_ranks(const std::function<void(int, int)>& job);
    void rank_job(int rank, int tid, std::span<const double> x, std::span<double> y);
    void post_exchange(RankState& rs, std::span<const double> x);
    void complete_exchange(RankState& rs);
    void diag_rows(RankState& rs, int worker, int tid, std::span<const double> x,
                   std::span<double> y);
    void off_rows(RankState& rs, int worker, int tid, std::span<const double> x,
                  std::span<double> y);

    ExecConfig cfg_;
    std::shared_ptr<Fabric> fabric_;
    CsrMatrix serial_matrix_;  // only populated for the serial model
    index_t nrows_ = 0;
    index_t nnz_ = 0;
    std::vector<RowRange> ranges_;
    ScatterPlan plan_;
    PartitionCache cache_;
    std::vector<RankState> ranks_;
    std::atomic<bool> busy_{false};
    std::unique_ptr<std::atomic<bool>[]> posted_;  // per rank, task models

    bool track_ = false;
    std::unique_ptr<std::atomic<std::uint32_t>[]> diag_writes_;
    std::unique_ptr<std::atomic<std::uint32_t>[]> off_writes_;
};

std::unique_ptr<MultContext> create_context(const CsrMatrix& a, const ExecConfig& cfg,
                                            std::shared_ptr<Fabric> fabric = nullptr);

/// Flops of one multiply by the 2 * nnz convention.
inline double spmv_flops(index_t nnz) { return 2.0 * static_cast<double>(nnz); }

}  // namespace hspmv

#endif  // HSPMV_ENGINE_HPP
