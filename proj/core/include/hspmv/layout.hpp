/// @file layout.hpp
/// @brief Per-rank diagonal/off-diagonal block split and the vector scatter plan.
///
/// A rank owns a contiguous range of rows and the matching range of input
/// vector entries. Its rows are split into A_diag (columns inside the owned
/// range, indexed locally) and A_off (every other column, compacted through
/// the sorted `ghost_cols` map). The scatter plan lists which owned vector
/// entries each rank ships to which neighbour so that every ghost buffer can
/// be filled before the off-diagonal product.

#ifndef HSPMV_LAYOUT_HPP
#define HSPMV_LAYOUT_HPP

#include <optional>
#include <span>
#include <vector>

#include "hspmv/csr.hpp"

namespace hspmv {

struct RowRange {
    index_t begin = 0;
    index_t end = 0;

    index_t size() const { return end - begin; }
    bool contains(index_t i) const { return i >= begin && i < end; }

    friend bool operator==(const RowRange&, const RowRange&) = default;
};

struct RankLayout {
    int rank = 0;
    RowRange own;
    CsrMatrix diag;
    CsrMatrix off;
    /// Global column of each A_off column, ascending.
    std::vector<index_t> ghost_cols;
    /// Ghost columns below own.begin; they occupy A_off columns [0, lower_ghosts).
    index_t lower_ghosts = 0;
};

/// One direction of one rank-pair exchange.
struct PeerList {
    int peer = 0;
    /// Global vector indices, ascending.
    std::vector<index_t> indices;
};

struct RankPlan {
    /// Sorted by peer.
    std::vector<PeerList> sends;
    std::vector<PeerList> recvs;
    /// For recvs[k], position in the ghost buffer of each received element.
    std::vector<std::vector<index_t>> recv_ghost_pos;
};

struct ScatterPlan {
    std::vector<RankPlan> ranks;
};

/// Contiguous split of `nrows` rows over `nranks` ranks. Without weights the
/// first (nrows mod nranks) ranks take one extra row; with weights the cut is
/// the greedy nonzero split from the balance module. Trailing ranks may be empty.
std::vector<RowRange> decompose_rows(index_t nrows, int nranks,
                                     std::optional<std::span<const index_t>> weights = {});

/// Throws StructuralError unless ranges are contiguous, disjoint and cover [0, nrows).
void validate_ranges(std::span<const RowRange> ranges, index_t nrows);

/// Index of the range containing global index i.
int owner_of(std::span<const RowRange> ranges, index_t i);

RankLayout build_rank_layout(const CsrMatrix& a, std::span<const RowRange> ranges, int rank);

ScatterPlan build_scatter_plan(std::span<const RankLayout> layouts);

/// Reconstructs the global matrix from all ranks' blocks.
CsrMatrix reassemble(std::span<const RankLayout> layouts, index_t ncols);

/// Local two-phase product for one rank: rows whose off-diagonal columns all lie
/// above the owned range accumulate the diagonal block first and then continue
/// with A_off; rows with ghost columns below the owned range are summed in full
/// global column order. Either way the result is bitwise equal to the same row
/// of spmv_serial on the global matrix.
void two_phase_multiply(const RankLayout& layout, std::span<const double> x_local,
                        std::span<const double> ghost, std::span<double> y_local);

/// Row `row` of the diagonal phase: stored-order sum over A_diag.
inline double diag_row(const RankLayout& l, index_t row, std::span<const double> x_local) {
    return row_dot(l.diag, row, x_local);
}

/// True when `row` has an off-diagonal entry left of the owned range and so
/// cannot be started before ghost values arrive.
inline bool is_deferred_row(const RankLayout& l, index_t row) {
    const auto cols = l.off.row_cols(row);
    return !cols.empty() && cols.front() < l.lower_ghosts;
}

/// Finishes `row` in the off-diagonal phase. `partial` is the diagonal-phase
/// result for non-deferred rows and is ignored for deferred ones.
inline double finish_row(const RankLayout& l, index_t row, double partial,
                         std::span<const double> x_local, std::span<const double> ghost) {
    const auto cols = l.off.row_cols(row);
    const auto vals = l.off.row_values(row);
    std::size_t k = 0;
    double sum = partial;
    if (!cols.empty() && cols.front() < l.lower_ghosts) {
        sum = 0.0;
        for (; k < cols.size() && cols[k] < l.lower_ghosts; ++k) {
            sum += vals[k] * ghost[cols[k]];
        }
        sum = row_dot(l.diag, row, x_local, sum);
    }
    for (; k < cols.size(); ++k) {
        sum += vals[k] * ghost[cols[k]];
    }
    return sum;
}

}  // namespace hspmv

#endif  // HSPMV_LAYOUT_HPP
