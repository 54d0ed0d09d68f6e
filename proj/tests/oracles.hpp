// Independent reference computations for the test suites. Nothing here calls
// into the engine, layout or balance code paths it is used to check.

#ifndef HSPMV_TESTS_ORACLES_HPP
#define HSPMV_TESTS_ORACLES_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "hspmv/csr.hpp"

namespace hspmv::oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const CsrMatrix& a) {
    Dense d(static_cast<std::size_t>(a.nrows()),
            std::vector<double>(static_cast<std::size_t>(a.ncols()), 0.0));
    for (index_t i = 0; i < a.nrows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            d[i][cols[k]] = vals[k];
        }
    }
    return d;
}

/// Dense multiply over every column in ascending order. Adding the zero
/// products of absent entries cannot change a sum that started at +0.
inline std::vector<double> dense_multiply(const Dense& a, std::span<const double> x) {
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            s += a[i][j] * x[j];
        }
        y[i] = s;
    }
    return y;
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
            return false;
        }
    }
    return true;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& e : v) e = dist(rng);
    return v;
}

/// Random sparse matrix (not necessarily symmetric) with the given density.
inline CsrMatrix random_sparse(index_t nrows, index_t ncols, double density,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    std::vector<Triplet> t;
    for (index_t i = 0; i < nrows; ++i) {
        for (index_t j = 0; j < ncols; ++j) {
            if (coin(rng) < density) t.push_back({i, j, val(rng)});
        }
    }
    return csr_from_triplets(t, nrows, ncols);
}

/// Minimum achievable max-load over every contiguous split of `w` into
/// `workers` blocks (blocks may be empty), by exhaustive enumeration.
inline index_t optimal_max_load(std::span<const index_t> w, int workers) {
    const auto n = static_cast<index_t>(w.size());
    index_t best = std::numeric_limits<index_t>::max();
    std::function<void(index_t, int, index_t)> rec = [&](index_t start, int left,
                                                         index_t cur_max) {
        if (cur_max >= best) return;
        if (left == 1) {
            index_t s = 0;
            for (index_t i = start; i < n; ++i) s += w[i];
            best = std::min(best, std::max(cur_max, s));
            return;
        }
        index_t s = 0;
        for (index_t end = start; end <= n; ++end) {
            if (end > start) s += w[end - 1];
            rec(end, left - 1, std::max(cur_max, s));
        }
    };
    rec(0, workers, 0);
    return best;
}

/// All cut positions for two workers: returns the best boundary b (first
/// minimizer) and its max load.
inline std::pair<index_t, index_t> best_two_way_cut(std::span<const index_t> w) {
    const auto n = static_cast<index_t>(w.size());
    index_t best_b = 0, best = std::numeric_limits<index_t>::max();
    for (index_t b = 0; b <= n; ++b) {
        index_t l = 0, r = 0;
        for (index_t i = 0; i < n; ++i) (i < b ? l : r) += w[i];
        if (std::max(l, r) < best) {
            best = std::max(l, r);
            best_b = b;
        }
    }
    return {best_b, best};
}

/// Plain Jacobi-PCG on CSR arrays, x0 = 0, sequential dot products.
struct RefCgResult {
    std::vector<double> x;
    index_t iterations = 0;
    bool converged = false;
};

inline RefCgResult reference_pcg(const CsrMatrix& a, std::span<const double> b, double rtol,
                                 index_t max_it) {
    const auto n = static_cast<std::size_t>(a.nrows());
    auto mul = [&](const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (index_t i = 0; i < a.nrows(); ++i) {
            double s = 0.0;
            const auto c = a.row_cols(i);
            const auto val = a.row_values(i);
            for (std::size_t k = 0; k < c.size(); ++k) s += val[k] * v[c[k]];
            out[i] = s;
        }
        return out;
    };
    auto dotp = [](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
    };
    std::vector<double> d(n);
    for (index_t i = 0; i < a.nrows(); ++i) d[i] = a.at(i, i);

    RefCgResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r(b.begin(), b.end()), z(n), p(n);
    const double bn = std::sqrt(dotp(r, r));
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / d[i];
    p = z;
    double rz = dotp(r, z);
    for (index_t k = 1; k <= max_it; ++k) {
        const auto q = mul(p);
        const double alpha = rz / dotp(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = k;
        if (std::sqrt(dotp(r, r)) / bn <= rtol) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / d[i];
        const double rz2 = dotp(r, z);
        const double beta = rz2 / rz;
        rz = rz2;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

/// Dense Cholesky solve of an SPD system.
inline std::vector<double> cholesky_solve(Dense a, std::vector<double> b) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double s = a[j][j];
        for (std::size_t k = 0; k < j; ++k) s -= a[j][k] * a[j][k];
        a[j][j] = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = a[i][j];
            for (std::size_t k = 0; k < j; ++k) t -= a[i][k] * a[j][k];
            a[i][j] = t / a[j][j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
        b[i] /= a[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
        b[i] /= a[i][i];
    }
    return b;
}

}  // namespace hspmv::oracle

#endif  // HSPMV_TESTS_ORACLES_HPP
