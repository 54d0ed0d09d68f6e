#include "hspmv/generators.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace hspmv {

CsrMatrix gen_extruded_laplacian(index_t nx, index_t ny, index_t layers) {
    if (nx < 1 || ny < 1 || layers < 1) {
        throw StructuralError("extruded laplacian: all grid dimensions must be >= 1");
    }
    const index_t n = nx * ny * layers;
    const auto node = [&](index_t i, index_t j, index_t k) { return (k * ny + j) * nx + i; };

    std::vector<index_t> offsets{0};
    std::vector<index_t> cols;
    std::vector<double> vals;
    offsets.reserve(static_cast<std::size_t>(n) + 1);
    cols.reserve(static_cast<std::size_t>(7 * n));
    vals.reserve(static_cast<std::size_t>(7 * n));

    // Neighbours are emitted in ascending node order: -z, -y, -x, self, +x, +y, +z.
    for (index_t k = 0; k < layers; ++k) {
        for (index_t j = 0; j < ny; ++j) {
            for (index_t i = 0; i < nx; ++i) {
                const auto push = [&](index_t c, double v) {
                    cols.push_back(c);
                    vals.push_back(v);
                };
                if (k > 0) push(node(i, j, k - 1), -1.0);
                if (j > 0) push(node(i, j - 1, k), -1.0);
                if (i > 0) push(node(i - 1, j, k), -1.0);
                push(node(i, j, k), 7.0);
                if (i + 1 < nx) push(node(i + 1, j, k), -1.0);
                if (j + 1 < ny) push(node(i, j + 1, k), -1.0);
                if (k + 1 < layers) push(node(i, j, k + 1), -1.0);
                offsets.push_back(static_cast<index_t>(cols.size()));
            }
        }
    }
    return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix gen_tridiagonal(index_t n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (index_t i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, -1.0});
        t.push_back({i, i, 2.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return csr_from_triplets(t, n, n);
}

CsrMatrix gen_arrowhead(index_t n) {
    if (n < 1) {
        throw StructuralError("arrowhead: n must be >= 1");
    }
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    const index_t last = n - 1;
    for (index_t i = 0; i < last; ++i) {
        t.push_back({i, i, 2.0});
        t.push_back({i, last, 1.0});
        t.push_back({last, i, 1.0});
    }
    t.push_back({last, last, static_cast<double>(n + 1)});
    return csr_from_triplets(t, n, n);
}

CsrMatrix gen_random_spd(index_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> value(-1.0, 1.0);

    std::vector<Triplet> t;
    std::vector<double> row_abs(static_cast<std::size_t>(n), 0.0);
    // Each upper-triangle pair is kept with probability `density` and mirrored.
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = i + 1; j < n; ++j) {
            if (coin(rng) < density) {
                const double v = value(rng);
                t.push_back({i, j, v});
                t.push_back({j, i, v});
                row_abs[i] += std::abs(v);
                row_abs[j] += std::abs(v);
            }
        }
    }
    for (index_t i = 0; i < n; ++i) {
        t.push_back({i, i, row_abs[i] + 1.0 + coin(rng)});
    }
    return csr_from_triplets(t, n, n);
}

}  // namespace hspmv
