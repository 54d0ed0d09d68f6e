/// @file balance.hpp
/// @brief Contiguous row partitions of one matrix block across worker threads.
///
/// Three schemes are provided: an equal-rows split (what a plain parallel-for
/// over rows gives), a greedy split on cumulative nonzero counts, and a local
/// diffusion pass that refines any partition by shifting single rows across
/// boundaries. Partitions depend only on (row weights, worker count), so they
/// can be computed once after assembly and cached next to the block.

#ifndef HSPMV_BALANCE_HPP
#define HSPMV_BALANCE_HPP

#include <span>
#include <string_view>
#include <vector>

#include "hspmv/csr.hpp"

namespace hspmv {

/// Worker w owns local rows [boundaries[w], boundaries[w + 1]).
struct ThreadPartition {
    std::vector<index_t> boundaries{0};

    int workers() const { return static_cast<int>(boundaries.size()) - 1; }
    index_t nrows() const { return boundaries.back(); }
    index_t begin(int w) const { return boundaries[w]; }
    index_t end(int w) const { return boundaries[w + 1]; }

    friend bool operator==(const ThreadPartition&, const ThreadPartition&) = default;
};

struct BalanceStats {
    std::vector<index_t> loads;
    index_t max_load = 0;
    double mean_load = 0.0;
    /// max_load / mean_load, or 1.0 for an empty block.
    double imbalance = 1.0;
};

enum class PartitionScheme { equal_rows, greedy, greedy_diffuse };

std::string_view to_string(PartitionScheme s);
PartitionScheme parse_partition_scheme(std::string_view name);

/// Throws StructuralError unless p is a valid partition of `nrows` rows.
void validate(const ThreadPartition& p, index_t nrows);

/// The first (nrows mod W) workers receive ceil(nrows / W) rows, the rest floor.
ThreadPartition equal_rows_partition(index_t nrows, int workers);

/// Walks rows accumulating weight and cuts after the row where the running
/// sum first reaches (remaining weight) / (remaining workers). The target is
/// recomputed after each cut; the last worker takes whatever is left.
ThreadPartition greedy_partition(std::span<const index_t> row_nnz, int workers);

/// Sweeps interior boundaries, moving one row left or right when that strictly
/// lowers max(load_left, load_right). Stops after a sweep without moves or
/// after `max_sweeps` sweeps (negative means nrows).
ThreadPartition diffuse(ThreadPartition p, std::span<const index_t> row_nnz,
                        index_t max_sweeps = -1);

BalanceStats balance_stats(const ThreadPartition& p, std::span<const index_t> row_nnz);

/// Dispatches on scheme. `row_nnz.size()` is the block's row count.
ThreadPartition make_partition(PartitionScheme scheme, std::span<const index_t> row_nnz,
                               int workers);

}  // namespace hspmv

#endif  // HSPMV_BALANCE_HPP
