#ifndef HSPMV_MATRIX_MARKET_HPP
#define HSPMV_MATRIX_MARKET_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hspmv/csr.hpp"

namespace hspmv {

/// Malformed Matrix Market input.
class MatrixMarketError : public StructuralError {
  public:
    using StructuralError::StructuralError;
};

/// Reads a coordinate Matrix Market stream (`real` or `integer` field,
/// `general` or `symmetric` symmetry). Symmetric files are expanded to full
/// storage; indices are converted from 1-based to 0-based.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes `coordinate real general` with round-trip exact values.
void write_matrix_market(std::ostream& out, const CsrMatrix& a);
std::string write_matrix_market(const CsrMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a);

}  // namespace hspmv

#endif  // HSPMV_MATRIX_MARKET_HPP
