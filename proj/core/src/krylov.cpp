#include "hspmv/krylov.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hspmv {
namespace {

// Per-rank partial sums, each in row order, then combined in rank order.
double dot(MultContext& ctx, std::span<const double> u, std::span<const double> v) {
    const auto partials = ctx.rank_partials([&](int, RowRange own) {
        double s = 0.0;
        for (index_t i = own.begin; i < own.end; ++i) {
            s += u[i] * v[i];
        }
        return s;
    });
    return std::accumulate(partials.begin(), partials.end(), 0.0);
}

}  // namespace

DenseVector jacobi_apply(std::span<const double> diag, std::span<const double> r) {
    if (diag.size() != r.size()) {
        throw StructuralError("jacobi_apply: length mismatch");
    }
    DenseVector z(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (diag[i] == 0.0) {
            throw SingularPreconditioner("jacobi preconditioner: zero diagonal in row " +
                                         std::to_string(i));
        }
        z[i] = r[i] / diag[i];
    }
    return z;
}

SolveResult cg_solve(MultContext& ctx, std::span<const double> b, double rtol,
                     index_t max_iterations) {
    const auto t0 = Clock::now();
    const index_t n = ctx.nrows();
    if (static_cast<index_t>(b.size()) != n) {
        throw StructuralError("cg_solve: rhs length " + std::to_string(b.size()) +
                              " does not match dimension " + std::to_string(n));
    }
    const DenseVector diag = ctx.diagonal();
    for (index_t i = 0; i < n; ++i) {
        if (diag[i] == 0.0) {
            throw SingularPreconditioner("jacobi preconditioner: zero diagonal in row " +
                                         std::to_string(i));
        }
    }

    SolveResult out;
    SolveReport& rep = out.report;
    DenseVector& x = out.x;
    x.assign(static_cast<std::size_t>(n), 0.0);
    DenseVector r(static_cast<std::size_t>(n)), z(r.size()), p(r.size()), q(r.size());

    ctx.mat_mult(x, q);
    rep.spmv_count = 1;
    ctx.parallel_rows([&](int, index_t lo, index_t hi) {
        for (index_t i = lo; i < hi; ++i) r[i] = b[i] - q[i];
    });

    const double bnorm = std::sqrt(dot(ctx, b, b));
    const auto finish = [&] {
        rep.wall_time = Clock::now() - t0;
        return out;
    };
    if (bnorm == 0.0) {
        rep.converged = true;
        rep.final_relative_residual = 0.0;
        return finish();
    }
    rep.final_relative_residual = std::sqrt(dot(ctx, r, r)) / bnorm;
    if (rep.final_relative_residual <= rtol) {
        rep.converged = true;
        return finish();
    }

    ctx.parallel_rows([&](int, index_t lo, index_t hi) {
        for (index_t i = lo; i < hi; ++i) {
            z[i] = r[i] / diag[i];
            p[i] = z[i];
        }
    });
    double rz = dot(ctx, r, z);

    for (index_t k = 1; k <= max_iterations; ++k) {
        ctx.mat_mult(p, q);
        ++rep.spmv_count;
        const double pq = dot(ctx, p, q);
        if (!(pq > 0.0)) {
            throw CgBreakdown("cg breakdown at iteration " + std::to_string(k) +
                              ": p^T A p = " + std::to_string(pq) + " (matrix not SPD?)");
        }
        const double alpha = rz / pq;
        ctx.parallel_rows([&](int, index_t lo, index_t hi) {
            for (index_t i = lo; i < hi; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
        });
        rep.iterations = k;
        rep.final_relative_residual = std::sqrt(dot(ctx, r, r)) / bnorm;
        if (rep.final_relative_residual <= rtol) {
            rep.converged = true;
            break;
        }
        ctx.parallel_rows([&](int, index_t lo, index_t hi) {
            for (index_t i = lo; i < hi; ++i) z[i] = r[i] / diag[i];
        });
        const double rz_next = dot(ctx, r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        ctx.parallel_rows([&](int, index_t lo, index_t hi) {
            for (index_t i = lo; i < hi; ++i) p[i] = z[i] + beta * p[i];
        });
    }
    return finish();
}

}  // namespace hspmv
