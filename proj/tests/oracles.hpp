#pragma once

// Independent reference computations used only by the tests. None of these
// go through the library's eigendecomposition, max-flow or closed-form paths.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "flowmc/graph.hpp"

namespace oracle {

using flowmc::Entry;
using flowmc::Matrix;
using flowmc::ObservationMask;
using flowmc::Vector;

// Random mask whose graph is connected: a random spanning tree over all rows
// and columns, then extra cells with probability p.
inline ObservationMask random_connected_mask(int n, int m, double p, std::mt19937_64& rng) {
    std::vector<Entry> cells;
    std::vector<int> order(n + m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    // order[0] must be paired across sides; grow the tree one vertex at a time.
    std::vector<int> rows_in, cols_in;
    auto attach = [&](int v) {
        if (v < n) {
            if (cols_in.empty()) {
                rows_in.push_back(v);
                return;
            }
            std::uniform_int_distribution<std::size_t> pick(0, cols_in.size() - 1);
            cells.push_back({v, cols_in[pick(rng)]});
            rows_in.push_back(v);
        } else {
            if (rows_in.empty()) {
                cols_in.push_back(v - n);
                return;
            }
            std::uniform_int_distribution<std::size_t> pick(0, rows_in.size() - 1);
            cells.push_back({rows_in[pick(rng)], v - n});
            cols_in.push_back(v - n);
        }
    };
    // Start with one row and one column joined so every later vertex attaches.
    std::uniform_int_distribution<int> r0(0, n - 1), c0(0, m - 1);
    const int first_row = r0(rng);
    const int first_col = c0(rng);
    cells.push_back({first_row, first_col});
    rows_in.push_back(first_row);
    cols_in.push_back(first_col);
    for (int v : order)
        if (v != first_row && v != n + first_col) attach(v);
    std::bernoulli_distribution extra(p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (extra(rng)) cells.push_back({i, j});
    return ObservationMask::from_entries(n, m, cells);
}

inline ObservationMask random_mask(int n, int m, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(p);
    std::vector<Entry> cells;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (keep(rng)) cells.push_back({i, j});
    return ObservationMask::from_entries(n, m, cells);
}

inline Matrix random_matrix(int n, int m, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out(i, j) = g(rng);
    return out;
}

// Laplacian assembled straight from the cell list.
inline Matrix laplacian(const ObservationMask& mask) {
    const int n = mask.n_rows();
    const int nv = n + mask.n_cols();
    Matrix l = Matrix::Zero(nv, nv);
    for (const auto& [i, j] : mask.entries()) {
        l(i, i) += 1;
        l(n + j, n + j) += 1;
        l(i, n + j) -= 1;
        l(n + j, i) -= 1;
    }
    return l;
}

// Pseudoinverse of a connected Laplacian: (L + J/n)^{-1} - J/n.
inline Matrix connected_pinv(const Matrix& l) {
    const auto nv = l.rows();
    const Matrix j = Matrix::Constant(nv, nv, 1.0 / static_cast<double>(nv));
    return Matrix(l + j).partialPivLu().inverse() - j;
}

inline double resistance(const ObservationMask& mask, int i, int j) {
    const Matrix p = connected_pinv(laplacian(mask));
    const int c = mask.n_rows() + j;
    return p(i, i) + p(c, c) - 2 * p(i, c);
}

// Minimum-norm least-squares fit of a_i + b_j to the observed cells via a
// complete orthogonal decomposition of the explicit design matrix.
inline Matrix lse_fit(const ObservationMask& mask, const Matrix& data) {
    const int n = mask.n_rows();
    const int m = mask.n_cols();
    const auto& cells = mask.entries();
    Matrix design = Matrix::Zero(static_cast<Eigen::Index>(cells.size()), n + m);
    Vector y(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t r = 0; r < cells.size(); ++r) {
        design(static_cast<Eigen::Index>(r), cells[r].row) = 1;
        design(static_cast<Eigen::Index>(r), n + cells[r].col) = 1;
        y(static_cast<Eigen::Index>(r)) = data(cells[r].row, cells[r].col);
    }
    const Vector theta = design.completeOrthogonalDecomposition().solve(y);
    Matrix fit(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) fit(i, j) = theta(i) + theta(n + j);
    return fit;
}

// Connectivity of u_i and v_j after removing the cells flagged in `removed`.
inline bool connected_without(const ObservationMask& mask, const std::vector<char>& removed, int i, int j) {
    const int n = mask.n_rows();
    const int nv = n + mask.n_cols();
    std::vector<std::vector<int>> adj(nv);
    const auto& cells = mask.entries();
    for (std::size_t e = 0; e < cells.size(); ++e) {
        if (removed[e]) continue;
        adj[cells[e].row].push_back(n + cells[e].col);
        adj[n + cells[e].col].push_back(cells[e].row);
    }
    std::vector<char> seen(nv, 0);
    std::queue<int> q;
    q.push(i);
    seen[i] = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                q.push(w);
            }
    }
    return seen[n + j];
}

// Smallest number of cells whose removal separates u_i from v_j, by
// exhaustive search over all subsets (feasible for <= ~16 cells).
inline int brute_force_min_cut(const ObservationMask& mask, int i, int j) {
    const int ne = static_cast<int>(mask.count());
    std::vector<char> none(ne, 0);
    if (!connected_without(mask, none, i, j)) return 0;
    int best = ne;
    for (std::uint32_t subset = 1; subset < (1u << ne); ++subset) {
        const int size = __builtin_popcount(subset);
        if (size >= best) continue;
        std::vector<char> removed(ne, 0);
        for (int e = 0; e < ne; ++e) removed[e] = (subset >> e) & 1u;
        if (!connected_without(mask, removed, i, j)) best = size;
    }
    return best;
}

inline double sample_variance(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size() - 1);
}

inline double mean(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace oracle
