#include "hspmv/balance.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace hspmv {
namespace {

index_t range_load(std::span<const index_t> row_nnz, index_t begin, index_t end) {
    return std::accumulate(row_nnz.begin() + begin, row_nnz.begin() + end, index_t{0});
}

void require_workers(int workers) {
    if (workers < 1) {
        throw StructuralError("partition: worker count must be >= 1, got " +
                              std::to_string(workers));
    }
}

}  // namespace

std::string_view to_string(PartitionScheme s) {
    switch (s) {
        case PartitionScheme::equal_rows: return "equal-rows";
        case PartitionScheme::greedy: return "greedy";
        case PartitionScheme::greedy_diffuse: return "diffuse";
    }
    return "?";
}

PartitionScheme parse_partition_scheme(std::string_view name) {
    if (name == "equal-rows" || name == "equal") return PartitionScheme::equal_rows;
    if (name == "greedy") return PartitionScheme::greedy;
    if (name == "diffuse" || name == "greedy-diffuse") return PartitionScheme::greedy_diffuse;
    throw std::invalid_argument("unknown partition scheme '" + std::string(name) + "'");
}

void validate(const ThreadPartition& p, index_t nrows) {
    if (p.boundaries.size() < 2) {
        throw StructuralError("partition needs at least one worker");
    }
    if (p.boundaries.front() != 0 || p.boundaries.back() != nrows) {
        throw StructuralError("partition does not span [0, " + std::to_string(nrows) + ")");
    }
    if (!std::is_sorted(p.boundaries.begin(), p.boundaries.end())) {
        throw StructuralError("partition boundaries decrease");
    }
}

ThreadPartition equal_rows_partition(index_t nrows, int workers) {
    require_workers(workers);
    ThreadPartition p;
    p.boundaries.resize(static_cast<std::size_t>(workers) + 1);
    const index_t base = nrows / workers;
    const index_t extra = nrows % workers;
    p.boundaries[0] = 0;
    for (int w = 0; w < workers; ++w) {
        p.boundaries[w + 1] = p.boundaries[w] + base + (w < extra ? 1 : 0);
    }
    return p;
}

ThreadPartition greedy_partition(std::span<const index_t> row_nnz, int workers) {
    require_workers(workers);
    const auto nrows = static_cast<index_t>(row_nnz.size());
    ThreadPartition p;
    p.boundaries.assign(static_cast<std::size_t>(workers) + 1, nrows);
    p.boundaries[0] = 0;

    index_t remaining = range_load(row_nnz, 0, nrows);
    index_t row = 0;
    for (int w = 0; w + 1 < workers; ++w) {
        const index_t workers_left = workers - w;
        index_t load = 0;
        // Integer form of load >= remaining / workers_left.
        while (row < nrows) {
            load += row_nnz[row++];
            if (load * workers_left >= remaining) {
                break;
            }
        }
        p.boundaries[w + 1] = row;
        remaining -= load;
    }
    return p;
}

ThreadPartition diffuse(ThreadPartition p, std::span<const index_t> row_nnz,
                        index_t max_sweeps) {
    const auto nrows = static_cast<index_t>(row_nnz.size());
    validate(p, nrows);
    if (max_sweeps < 0) {
        max_sweeps = nrows;
    }
    const int workers = p.workers();
    std::vector<index_t> loads(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        loads[w] = range_load(row_nnz, p.begin(w), p.end(w));
    }

    auto& b = p.boundaries;
    for (index_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        for (int k = 1; k < workers; ++k) {
            const index_t left = loads[k - 1];
            const index_t right = loads[k];
            const index_t current = std::max(left, right);
            index_t best = current;
            int direction = 0;
            // Last row of the left block moves right.
            if (b[k] > b[k - 1]) {
                const index_t r = row_nnz[b[k] - 1];
                const index_t candidate = std::max(left - r, right + r);
                if (candidate < best) {
                    best = candidate;
                    direction = -1;
                }
            }
            // First row of the right block moves left.
            if (b[k] < b[k + 1]) {
                const index_t r = row_nnz[b[k]];
                const index_t candidate = std::max(left + r, right - r);
                if (candidate < best) {
                    best = candidate;
                    direction = +1;
                }
            }
            if (direction == -1) {
                const index_t r = row_nnz[--b[k]];
                loads[k - 1] -= r;
                loads[k] += r;
                moved = true;
            } else if (direction == +1) {
                const index_t r = row_nnz[b[k]++];
                loads[k - 1] += r;
                loads[k] -= r;
                moved = true;
            }
        }
        if (!moved) {
            break;
        }
    }
    return p;
}

BalanceStats balance_stats(const ThreadPartition& p, std::span<const index_t> row_nnz) {
    validate(p, static_cast<index_t>(row_nnz.size()));
    BalanceStats s;
    s.loads.resize(static_cast<std::size_t>(p.workers()));
    index_t total = 0;
    for (int w = 0; w < p.workers(); ++w) {
        s.loads[w] = range_load(row_nnz, p.begin(w), p.end(w));
        total += s.loads[w];
    }
    s.max_load = *std::max_element(s.loads.begin(), s.loads.end());
    s.mean_load = static_cast<double>(total) / p.workers();
    s.imbalance = total == 0 ? 1.0 : static_cast<double>(s.max_load) / s.mean_load;
    return s;
}

ThreadPartition make_partition(PartitionScheme scheme, std::span<const index_t> row_nnz,
                               int workers) {
    switch (scheme) {
        case PartitionScheme::equal_rows:
            return equal_rows_partition(static_cast<index_t>(row_nnz.size()), workers);
        case PartitionScheme::greedy:
            return greedy_partition(row_nnz, workers);
        case PartitionScheme::greedy_diffuse:
            return diffuse(greedy_partition(row_nnz, workers), row_nnz);
    }
    throw std::logic_error("unhandled partition scheme");
}

}  // namespace hspmv
