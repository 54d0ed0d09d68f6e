#ifndef HSPMV_GENERATORS_HPP
#define HSPMV_GENERATORS_HPP

#include <cstdint>

#include "hspmv/csr.hpp"

namespace hspmv {

/// 7-point Laplacian on an nx x ny x layers grid, node (i, j, k) numbered
/// (k * ny + j) * nx + i. Diagonal is 7 everywhere (6-neighbour stencil plus a
/// unit shift) so the matrix is strictly diagonally dominant and SPD. Work
/// scales linearly with `layers`, like a vertically extruded mesh.
CsrMatrix gen_extruded_laplacian(index_t nx, index_t ny, index_t layers);

/// 1-D tridiagonal [-1 2 -1] matrix of size n.
CsrMatrix gen_tridiagonal(index_t n);

/// Arrowhead matrix: diagonal, dense last row and dense last column.
/// Diagonal entries are chosen so the matrix is SPD.
CsrMatrix gen_arrowhead(index_t n);

/// Random symmetric, strictly diagonally dominant (hence SPD) matrix with
/// roughly `density * n * n` off-diagonal entries.
CsrMatrix gen_random_spd(index_t n, double density, std::uint64_t seed);

}  // namespace hspmv

#endif  // HSPMV_GENERATORS_HPP
