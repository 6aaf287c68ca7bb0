#include "flowmc/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace flowmc {

ObservationMask::ObservationMask(int n_rows, int n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), bits_(static_cast<std::size_t>(n_rows) * n_cols, 0) {
    if (n_rows <= 0 || n_cols <= 0) throw InvalidArgument("mask dimensions must be positive");
}

ObservationMask ObservationMask::from_entries(int n_rows, int n_cols,
                                              const std::vector<Entry>& entries,
                                              int* duplicates) {
    ObservationMask mask(n_rows, n_cols);
    int dup = 0;
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols)
            throw InvalidArgument("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                                  ") outside " + std::to_string(n_rows) + "x" +
                                  std::to_string(n_cols) + " mask");
        if (mask.observed(e.row, e.col))
            ++dup;
        else
            mask.bits_[static_cast<std::size_t>(e.row) * n_cols + e.col] = 1;
    }
    for (int i = 0; i < n_rows; ++i)
        for (int j = 0; j < n_cols; ++j)
            if (mask.observed(i, j)) mask.entries_.push_back({i, j});
    if (duplicates) *duplicates = dup;
    return mask;
}

ObservationMask ObservationMask::full(int n_rows, int n_cols) {
    std::vector<Entry> all;
    for (int i = 0; i < n_rows; ++i)
        for (int j = 0; j < n_cols; ++j) all.push_back({i, j});
    return from_entries(n_rows, n_cols, all);
}

bool ObservationMask::observed(int i, int j) const {
    if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_) return false;
    return bits_[static_cast<std::size_t>(i) * n_cols_ + j] != 0;
}

void ObservationMask::insert(int i, int j) {
    if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_)
        throw InvalidArgument("entry outside mask");
    if (observed(i, j)) return;
    bits_[static_cast<std::size_t>(i) * n_cols_ + j] = 1;
    entries_.insert(std::upper_bound(entries_.begin(), entries_.end(), Entry{i, j}), Entry{i, j});
}

std::vector<int> ComponentLabeling::members(int c) const {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(component_id.size()); ++v)
        if (component_id[v] == c) out.push_back(v);
    return out;
}

BipartiteGraph::BipartiteGraph(const ObservationMask& mask)
    : n_left_(mask.n_rows()),
      n_right_(mask.n_cols()),
      mask_(mask),
      edges_(mask.entries()),
      adjacency_(n_left_ + n_right_),
      row_edge_ids_(n_left_) {
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        const auto [i, j] = edges_[e];
        adjacency_[i].push_back(n_left_ + j);
        adjacency_[n_left_ + j].push_back(i);
        row_edge_ids_[i].push_back(e);
    }
    // Row-major edge order already leaves every list sorted.
}

int BipartiteGraph::edge_index(int i, int j) const {
    if (i < 0 || i >= n_left_) return -1;
    const auto& nbrs = adjacency_[i];
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), n_left_ + j);
    if (it == nbrs.end() || *it != n_left_ + j) return -1;
    return row_edge_ids_[i][static_cast<std::size_t>(it - nbrs.begin())];
}

BipartiteGraph build_graph(const ObservationMask& mask) { return BipartiteGraph(mask); }

ComponentLabeling connected_components(const BipartiteGraph& graph) {
    const int nv = graph.n_vertices();
    ComponentLabeling out;
    out.component_id.assign(nv, -1);
    std::queue<int> frontier;
    for (int start = 0; start < nv; ++start) {
        if (out.component_id[start] != -1) continue;
        const int label = out.component_count++;
        out.component_id[start] = label;
        frontier.push(start);
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w : graph.neighbors(v)) {
                if (out.component_id[w] == -1) {
                    out.component_id[w] = label;
                    frontier.push(w);
                }
            }
        }
    }
    return out;
}

Matrix incidence_matrix(const BipartiteGraph& graph) {
    Matrix b = Matrix::Zero(graph.n_edges(), graph.n_vertices());
    for (int e = 0; e < graph.n_edges(); ++e) {
        const auto [i, j] = graph.edges()[e];
        b(e, graph.row_vertex(i)) = 1.0;
        b(e, graph.col_vertex(j)) = -1.0;
    }
    return b;
}

Matrix laplacian(const BipartiteGraph& graph) {
    const int nv = graph.n_vertices();
    Matrix l = Matrix::Zero(nv, nv);
    for (const auto& [i, j] : graph.edges()) {
        const int u = graph.row_vertex(i);
        const int v = graph.col_vertex(j);
        l(u, u) += 1.0;
        l(v, v) += 1.0;
        l(u, v) -= 1.0;
        l(v, u) -= 1.0;
    }
    return l;
}

void check_path(const BipartiteGraph& graph, const Path& path) {
    if (path.size() < 2) throw InvalidPath("path needs at least one edge");
    if (!graph.is_left(path.front())) throw InvalidPath("path must start at a row vertex");
    if (graph.is_left(path.back())) throw InvalidPath("path must end at a column vertex");
    std::vector<char> seen(graph.n_vertices(), 0);
    for (std::size_t s = 0; s < path.size(); ++s) {
        const int v = path[s];
        if (v < 0 || v >= graph.n_vertices()) throw InvalidPath("vertex id out of range");
        if (seen[v]) throw InvalidPath("path revisits vertex " + std::to_string(v));
        seen[v] = 1;
        if (s == 0) continue;
        const int prev = path[s - 1];
        if (graph.is_left(prev) == graph.is_left(v)) throw InvalidPath("path does not alternate sides");
        const int row = graph.is_left(prev) ? prev : v;
        const int col = (graph.is_left(prev) ? v : prev) - graph.n_left();
        if (graph.edge_index(row, col) < 0)
            throw InvalidPath("entry (" + std::to_string(row) + "," + std::to_string(col) +
                              ") is not observed");
    }
}

Vector vec_omega(const ObservationMask& mask, const Matrix& data) {
    if (data.rows() != mask.n_rows() || data.cols() != mask.n_cols())
        throw DimensionMismatch("data is " + std::to_string(data.rows()) + "x" +
                                std::to_string(data.cols()) + ", mask is " +
                                std::to_string(mask.n_rows()) + "x" +
                                std::to_string(mask.n_cols()));
    Vector out(static_cast<Eigen::Index>(mask.count()));
    Eigen::Index k = 0;
    for (const auto& [i, j] : mask.entries()) out(k++) = data(i, j);
    return out;
}

Matrix scatter_omega(const ObservationMask& mask, const Vector& values, double fill) {
    if (values.size() != static_cast<Eigen::Index>(mask.count()))
        throw DimensionMismatch("value count does not match observation count");
    Matrix out = Matrix::Constant(mask.n_rows(), mask.n_cols(), fill);
    Eigen::Index k = 0;
    for (const auto& [i, j] : mask.entries()) out(i, j) = values(k++);
    return out;
}

}  // namespace flowmc
