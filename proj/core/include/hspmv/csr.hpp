/// @file csr.hpp
/// @brief Compressed sparse row storage and the serial reference kernel.
///
/// Every block handled by the distributed engine (whole matrix, diagonal
/// block, off-diagonal block) is a CsrMatrix. Rows store their entries in
/// strictly ascending column order, and all kernels accumulate a row in that
/// stored order; this is what makes the parallel engine bitwise reproducible.

#ifndef HSPMV_CSR_HPP
#define HSPMV_CSR_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hspmv {

/// Row/column/nonzero index. 64-bit so a block can address more than 2^31 entries.
using index_t = std::int64_t;

using DenseVector = std::vector<double>;

/// Thrown when an index, dimension or structural invariant is violated.
class StructuralError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Triplet {
    index_t row = 0;
    index_t col = 0;
    double value = 0.0;
};

class CsrMatrix {
  public:
    CsrMatrix() = default;

    /// Takes ownership of raw CSR arrays and validates them.
    CsrMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_offsets,
              std::vector<index_t> col_indices, std::vector<double> values);

    /// nrows x ncols matrix without entries.
    static CsrMatrix zeros(index_t nrows, index_t ncols);
    static CsrMatrix identity(index_t n);

    index_t nrows() const { return nrows_; }
    index_t ncols() const { return ncols_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    std::span<const index_t> row_offsets() const { return row_offsets_; }
    std::span<const index_t> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    index_t row_nnz(index_t row) const { return row_offsets_[row + 1] - row_offsets_[row]; }
    std::span<const index_t> row_cols(index_t row) const {
        return std::span<const index_t>(col_indices_).subspan(row_offsets_[row], row_nnz(row));
    }
    std::span<const double> row_values(index_t row) const {
        return std::span<const double>(values_).subspan(row_offsets_[row], row_nnz(row));
    }

    /// Nonzero count of every row.
    std::vector<index_t> row_nnz_profile() const;

    /// Stored value at (row, col), or 0 when the entry is absent.
    double at(index_t row, index_t col) const;

    /// Main diagonal as a dense vector (0 where no entry is stored).
    DenseVector diagonal() const;

    CsrMatrix transpose() const;

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

  private:
    index_t nrows_ = 0;
    index_t ncols_ = 0;
    std::vector<index_t> row_offsets_{0};
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

/// Checks every CSR invariant; throws StructuralError describing the first violation.
void validate(index_t nrows, index_t ncols, std::span<const index_t> row_offsets,
              std::span<const index_t> col_indices, std::span<const double> values);

/// Assembles a canonical CSR matrix. Duplicate (row, col) entries are summed;
/// a sum that is exactly zero is kept as an explicit entry.
CsrMatrix csr_from_triplets(std::span<const Triplet> entries, index_t nrows, index_t ncols);

/// Accumulates row `row` of `a` against `x` in stored column order, starting from `init`.
inline double row_dot(const CsrMatrix& a, index_t row, std::span<const double> x,
                      double init = 0.0) {
    const auto offsets = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    double sum = init;
    for (index_t k = offsets[row]; k < offsets[row + 1]; ++k) {
        sum += vals[k] * x[cols[k]];
    }
    return sum;
}

/// y = A x with each row summed in ascending column order. This is the oracle
/// every distributed execution model is compared against.
DenseVector spmv_serial(const CsrMatrix& a, std::span<const double> x);
void spmv_serial(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

}  // namespace hspmv

#endif  // HSPMV_CSR_HPP
