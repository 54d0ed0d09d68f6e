#include "hspmv/csr.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace hspmv {

void validate(index_t nrows, index_t ncols, std::span<const index_t> row_offsets,
              std::span<const index_t> col_indices, std::span<const double> values) {
    if (nrows < 0 || ncols < 0) {
        throw StructuralError("negative matrix dimension");
    }
    if (static_cast<index_t>(row_offsets.size()) != nrows + 1) {
        throw StructuralError("row_offsets must have nrows + 1 entries");
    }
    if (row_offsets.front() != 0) {
        throw StructuralError("row_offsets[0] must be 0");
    }
    if (col_indices.size() != values.size()) {
        throw StructuralError("col_indices and values differ in length");
    }
    if (row_offsets.back() != static_cast<index_t>(values.size())) {
        throw StructuralError("row_offsets[nrows] must equal nnz");
    }
    for (index_t i = 0; i < nrows; ++i) {
        if (row_offsets[i + 1] < row_offsets[i]) {
            std::ostringstream msg;
            msg << "row_offsets decreases at row " << i;
            throw StructuralError(msg.str());
        }
        for (index_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
            const index_t c = col_indices[k];
            if (c < 0 || c >= ncols) {
                std::ostringstream msg;
                msg << "column " << c << " out of range [0, " << ncols << ") in row " << i;
                throw StructuralError(msg.str());
            }
            if (k > row_offsets[i] && col_indices[k - 1] >= c) {
                std::ostringstream msg;
                msg << "columns not strictly increasing in row " << i;
                throw StructuralError(msg.str());
            }
        }
    }
}

CsrMatrix::CsrMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_offsets,
                     std::vector<index_t> col_indices, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    validate(nrows_, ncols_, row_offsets_, col_indices_, values_);
}

CsrMatrix CsrMatrix::zeros(index_t nrows, index_t ncols) {
    return CsrMatrix(nrows, ncols, std::vector<index_t>(static_cast<std::size_t>(nrows) + 1, 0),
                     {}, {});
}

CsrMatrix CsrMatrix::identity(index_t n) {
    std::vector<index_t> offsets(static_cast<std::size_t>(n) + 1);
    std::iota(offsets.begin(), offsets.end(), index_t{0});
    std::vector<index_t> cols(static_cast<std::size_t>(n));
    std::iota(cols.begin(), cols.end(), index_t{0});
    return CsrMatrix(n, n, std::move(offsets), std::move(cols),
                     std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

std::vector<index_t> CsrMatrix::row_nnz_profile() const {
    std::vector<index_t> out(static_cast<std::size_t>(nrows_));
    for (index_t i = 0; i < nrows_; ++i) {
        out[i] = row_nnz(i);
    }
    return out;
}

double CsrMatrix::at(index_t row, index_t col) const {
    const auto cols = row_cols(row);
    const auto it = std::lower_bound(cols.begin(), cols.end(), col);
    if (it == cols.end() || *it != col) {
        return 0.0;
    }
    return row_values(row)[it - cols.begin()];
}

DenseVector CsrMatrix::diagonal() const {
    DenseVector d(static_cast<std::size_t>(std::min(nrows_, ncols_)), 0.0);
    for (index_t i = 0; i < static_cast<index_t>(d.size()); ++i) {
        d[i] = at(i, i);
    }
    return d;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<index_t> offsets(static_cast<std::size_t>(ncols_) + 1, 0);
    for (const index_t c : col_indices_) {
        ++offsets[c + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<index_t> cols(col_indices_.size());
    std::vector<double> vals(values_.size());
    std::vector<index_t> next(offsets.begin(), offsets.end() - 1);
    // Rows are visited in ascending order, so each transposed row comes out sorted.
    for (index_t i = 0; i < nrows_; ++i) {
        for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const index_t dst = next[col_indices_[k]]++;
            cols[dst] = i;
            vals[dst] = values_[k];
        }
    }
    return CsrMatrix(ncols_, nrows_, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix csr_from_triplets(std::span<const Triplet> entries, index_t nrows, index_t ncols) {
    if (nrows < 0 || ncols < 0) {
        throw StructuralError("negative matrix dimension");
    }
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const Triplet& t = entries[e];
        if (t.row < 0 || t.row >= nrows) {
            std::ostringstream msg;
            msg << "entry " << e << ": row " << t.row << " >= nrows " << nrows;
            throw StructuralError(msg.str());
        }
        if (t.col < 0 || t.col >= ncols) {
            std::ostringstream msg;
            msg << "entry " << e << ": column " << t.col << " >= ncols " << ncols;
            throw StructuralError(msg.str());
        }
    }

    // Stable sort keeps duplicates in input order so their sum is reproducible.
    std::vector<Triplet> sorted(entries.begin(), entries.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<index_t> offsets(static_cast<std::size_t>(nrows) + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(sorted.size());
    vals.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const Triplet& t = sorted[k];
        if (k > 0 && sorted[k - 1].row == t.row && sorted[k - 1].col == t.col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++offsets[t.row + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return CsrMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

void spmv_serial(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    if (static_cast<index_t>(x.size()) != a.ncols()) {
        throw StructuralError("spmv: input length " + std::to_string(x.size()) +
                              " does not match ncols " + std::to_string(a.ncols()));
    }
    if (static_cast<index_t>(y.size()) != a.nrows()) {
        throw StructuralError("spmv: output length " + std::to_string(y.size()) +
                              " does not match nrows " + std::to_string(a.nrows()));
    }
    for (index_t i = 0; i < a.nrows(); ++i) {
        y[i] = row_dot(a, i, x);
    }
}

DenseVector spmv_serial(const CsrMatrix& a, std::span<const double> x) {
    DenseVector y(static_cast<std::size_t>(a.nrows()));
    spmv_serial(a, x, y);
    return y;
}

}  // namespace hspmv
