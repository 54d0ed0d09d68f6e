#ifndef HSPMV_KRYLOV_HPP
#define HSPMV_KRYLOV_HPP

#include <span>
#include <stdexcept>

#include "hspmv/engine.hpp"

namespace hspmv {

/// Default iteration cap of the benchmark solver protocol.
inline constexpr index_t kDefaultMaxIterations = 10'000;
inline constexpr double kDefaultRtol = 1e-5;

class SingularPreconditioner : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// p^T A p <= 0 during CG: the operator is not SPD.
class CgBreakdown : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SolveReport {
    index_t iterations = 0;
    bool converged = false;
    /// Recurred ||r|| / ||b|| at exit.
    double final_relative_residual = 0.0;
    Nanos wall_time{0};
    /// Always iterations + 1: the initial residual costs one multiply.
    index_t spmv_count = 0;
};

struct SolveResult {
    DenseVector x;
    SolveReport report;
};

/// z[i] = r[i] / diag[i]. Throws SingularPreconditioner on a zero entry.
DenseVector jacobi_apply(std::span<const double> diag, std::span<const double> r);

/// Jacobi-preconditioned CG from x0 = 0. Stops when the unpreconditioned
/// residual satisfies ||r||_2 / ||b||_2 <= rtol or after max_iterations
/// (reported as converged = false). Dot products are per-rank partial sums
/// combined in rank order, so results are bitwise reproducible for a fixed
/// rank count regardless of execution model or thread count.
SolveResult cg_solve(MultContext& ctx, std::span<const double> b, double rtol = kDefaultRtol,
                     index_t max_iterations = kDefaultMaxIterations);

}  // namespace hspmv

#endif  // HSPMV_KRYLOV_HPP
