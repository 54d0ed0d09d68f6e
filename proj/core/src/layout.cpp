#include "hspmv/layout.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "hspmv/balance.hpp"

namespace hspmv {

std::vector<RowRange> decompose_rows(index_t nrows, int nranks,
                                     std::optional<std::span<const index_t>> weights) {
    if (nranks < 1) {
        throw StructuralError("decompose_rows: nranks must be >= 1");
    }
    if (nrows < 0) {
        throw StructuralError("decompose_rows: negative row count");
    }
    ThreadPartition cut;
    if (weights) {
        if (static_cast<index_t>(weights->size()) != nrows) {
            throw StructuralError("decompose_rows: weight count does not match nrows");
        }
        cut = greedy_partition(*weights, nranks);
    } else {
        cut = equal_rows_partition(nrows, nranks);
    }
    std::vector<RowRange> ranges(static_cast<std::size_t>(nranks));
    for (int r = 0; r < nranks; ++r) {
        ranges[r] = {cut.begin(r), cut.end(r)};
    }
    return ranges;
}

void validate_ranges(std::span<const RowRange> ranges, index_t nrows) {
    if (ranges.empty()) {
        throw StructuralError("no row ranges");
    }
    index_t expect = 0;
    for (std::size_t r = 0; r < ranges.size(); ++r) {
        if (ranges[r].begin != expect || ranges[r].end < ranges[r].begin) {
            throw StructuralError("row range " + std::to_string(r) +
                                  " is not contiguous with its predecessor");
        }
        expect = ranges[r].end;
    }
    if (expect != nrows) {
        throw StructuralError("row ranges cover " + std::to_string(expect) + " of " +
                              std::to_string(nrows) + " rows");
    }
}

int owner_of(std::span<const RowRange> ranges, index_t i) {
    // First range whose end exceeds i; empty ranges are skipped naturally.
    const auto it = std::upper_bound(ranges.begin(), ranges.end(), i,
                                     [](index_t v, const RowRange& r) { return v < r.end; });
    if (it == ranges.end() || !it->contains(i)) {
        throw StructuralError("index " + std::to_string(i) + " is owned by no rank");
    }
    return static_cast<int>(it - ranges.begin());
}

RankLayout build_rank_layout(const CsrMatrix& a, std::span<const RowRange> ranges, int rank) {
    if (a.nrows() != a.ncols()) {
        throw StructuralError("distributed layout requires a square matrix");
    }
    validate_ranges(ranges, a.nrows());
    if (rank < 0 || rank >= static_cast<int>(ranges.size())) {
        throw StructuralError("rank " + std::to_string(rank) + " out of range");
    }

    RankLayout l;
    l.rank = rank;
    l.own = ranges[rank];
    const RowRange own = l.own;

    std::vector<index_t> ghosts;
    for (index_t i = own.begin; i < own.end; ++i) {
        for (const index_t c : a.row_cols(i)) {
            if (!own.contains(c)) {
                ghosts.push_back(c);
            }
        }
    }
    std::sort(ghosts.begin(), ghosts.end());
    ghosts.erase(std::unique(ghosts.begin(), ghosts.end()), ghosts.end());
    l.lower_ghosts = std::lower_bound(ghosts.begin(), ghosts.end(), own.begin) - ghosts.begin();

    std::vector<index_t> d_off{0}, o_off{0}, d_col, o_col;
    std::vector<double> d_val, o_val;
    d_off.reserve(static_cast<std::size_t>(own.size()) + 1);
    o_off.reserve(static_cast<std::size_t>(own.size()) + 1);
    for (index_t i = own.begin; i < own.end; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (own.contains(cols[k])) {
                d_col.push_back(cols[k] - own.begin);
                d_val.push_back(vals[k]);
            } else {
                const auto pos = std::lower_bound(ghosts.begin(), ghosts.end(), cols[k]);
                o_col.push_back(pos - ghosts.begin());
                o_val.push_back(vals[k]);
            }
        }
        d_off.push_back(static_cast<index_t>(d_col.size()));
        o_off.push_back(static_cast<index_t>(o_col.size()));
    }
    l.diag = CsrMatrix(own.size(), own.size(), std::move(d_off), std::move(d_col),
                       std::move(d_val));
    l.off = CsrMatrix(own.size(), static_cast<index_t>(ghosts.size()), std::move(o_off),
                      std::move(o_col), std::move(o_val));
    l.ghost_cols = std::move(ghosts);
    return l;
}

ScatterPlan build_scatter_plan(std::span<const RankLayout> layouts) {
    std::vector<RowRange> ranges;
    ranges.reserve(layouts.size());
    for (const auto& l : layouts) {
        ranges.push_back(l.own);
    }
    const index_t nrows = ranges.empty() ? 0 : ranges.back().end;
    validate_ranges(ranges, nrows);

    const auto nranks = layouts.size();
    ScatterPlan plan;
    plan.ranks.resize(nranks);
    // sends[q][r]: what q ships to r; std::map keeps peers ordered.
    std::vector<std::map<int, std::vector<index_t>>> sends(nranks);
    for (std::size_t r = 0; r < nranks; ++r) {
        const auto& ghosts = layouts[r].ghost_cols;
        auto& rp = plan.ranks[r];
        for (std::size_t g = 0; g < ghosts.size(); ++g) {
            const int q = owner_of(ranges, ghosts[g]);
            if (rp.recvs.empty() || rp.recvs.back().peer != q) {
                rp.recvs.push_back({q, {}});
                rp.recv_ghost_pos.emplace_back();
            }
            rp.recvs.back().indices.push_back(ghosts[g]);
            rp.recv_ghost_pos.back().push_back(static_cast<index_t>(g));
            sends[q][static_cast<int>(r)].push_back(ghosts[g]);
        }
    }
    for (std::size_t q = 0; q < nranks; ++q) {
        for (auto& [peer, idx] : sends[q]) {
            plan.ranks[q].sends.push_back({peer, std::move(idx)});
        }
    }
    return plan;
}

CsrMatrix reassemble(std::span<const RankLayout> layouts, index_t ncols) {
    std::vector<Triplet> t;
    for (const auto& l : layouts) {
        for (index_t i = 0; i < l.own.size(); ++i) {
            const auto dc = l.diag.row_cols(i);
            const auto dv = l.diag.row_values(i);
            for (std::size_t k = 0; k < dc.size(); ++k) {
                t.push_back({l.own.begin + i, l.own.begin + dc[k], dv[k]});
            }
            const auto oc = l.off.row_cols(i);
            const auto ov = l.off.row_values(i);
            for (std::size_t k = 0; k < oc.size(); ++k) {
                t.push_back({l.own.begin + i, l.ghost_cols[oc[k]], ov[k]});
            }
        }
    }
    const index_t nrows = layouts.empty() ? 0 : layouts.back().own.end;
    return csr_from_triplets(t, nrows, ncols);
}

void two_phase_multiply(const RankLayout& layout, std::span<const double> x_local,
                        std::span<const double> ghost, std::span<double> y_local) {
    if (static_cast<index_t>(x_local.size()) != layout.own.size() ||
        static_cast<index_t>(y_local.size()) != layout.own.size() ||
        ghost.size() != layout.ghost_cols.size()) {
        throw StructuralError("two_phase_multiply: buffer length mismatch");
    }
    for (index_t i = 0; i < layout.own.size(); ++i) {
        y_local[i] = is_deferred_row(layout, i) ? 0.0 : diag_row(layout, i, x_local);
    }
    for (index_t i = 0; i < layout.own.size(); ++i) {
        y_local[i] = finish_row(layout, i, y_local[i], x_local, ghost);
    }
}

}  // namespace hspmv
