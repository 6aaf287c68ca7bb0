#pragma once

#include <utility>
#include <vector>

#include "flowmc/common.hpp"

namespace flowmc {

/// Observed (row, col) pair, 0-based.
struct Entry {
    int row;
    int col;
    auto operator<=>(const Entry&) const = default;
};

/// Binary observation pattern of an n x m matrix.
class ObservationMask {
public:
    ObservationMask() = default;
    ObservationMask(int n_rows, int n_cols);

    /// Builds a mask from (row, col) pairs. Duplicates collapse to a single
    /// observation; out-of-range pairs throw InvalidArgument.
    static ObservationMask from_entries(int n_rows, int n_cols, const std::vector<Entry>& entries,
                                        int* duplicates = nullptr);
    static ObservationMask full(int n_rows, int n_cols);

    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    std::size_t count() const { return entries_.size(); }

    bool observed(int i, int j) const;
    void insert(int i, int j);

    /// Observed entries in row-major order.
    const std::vector<Entry>& entries() const { return entries_; }

    bool operator==(const ObservationMask& other) const {
        return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ && entries_ == other.entries_;
    }

private:
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<char> bits_;
    std::vector<Entry> entries_;
};

/// Per-vertex component labels; the component containing the smallest vertex
/// index is 0 and labels increase in order of first appearance.
struct ComponentLabeling {
    std::vector<int> component_id;
    int component_count = 0;

    /// Vertices of component c in ascending order.
    std::vector<int> members(int c) const;
};

/// Bipartite observation graph. Vertices are u_0..u_{n-1} followed by
/// v_0..v_{m-1}; vertex n + j is column j. Edges follow the mask's row-major
/// order, so edge e corresponds to vec_omega element e.
class BipartiteGraph {
public:
    explicit BipartiteGraph(const ObservationMask& mask);

    int n_left() const { return n_left_; }
    int n_right() const { return n_right_; }
    int n_vertices() const { return n_left_ + n_right_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    int row_vertex(int i) const { return i; }
    int col_vertex(int j) const { return n_left_ + j; }
    bool is_left(int v) const { return v < n_left_; }

    const std::vector<Entry>& edges() const { return edges_; }
    /// Sorted neighbour vertex ids.
    const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }
    /// Edge index of (row i, col j), or -1 when unobserved.
    int edge_index(int i, int j) const;
    int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }

    const ObservationMask& mask() const { return mask_; }

private:
    int n_left_;
    int n_right_;
    ObservationMask mask_;
    std::vector<Entry> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<int>> row_edge_ids_;  // per row, edge ids aligned with row's columns
};

BipartiteGraph build_graph(const ObservationMask& mask);

ComponentLabeling connected_components(const BipartiteGraph& graph);

/// Oriented incidence matrix (n_e x n_v): +1 at the row vertex, -1 at the column vertex.
Matrix incidence_matrix(const BipartiteGraph& graph);

/// Graph Laplacian D - A.
Matrix laplacian(const BipartiteGraph& graph);

/// Alternating vertex sequence u_i -> v -> u -> ... -> v_j (global vertex ids).
using Path = std::vector<int>;

/// Throws InvalidPath unless `path` is a simple path that starts at a row
/// vertex, ends at a column vertex, alternates sides and uses only observed
/// entries.
void check_path(const BipartiteGraph& graph, const Path& path);

/// Edge count of a path.
inline int path_length(const Path& path) { return path.empty() ? 0 : static_cast<int>(path.size()) - 1; }

/// Observed entries of data in row-major mask order.
Vector vec_omega(const ObservationMask& mask, const Matrix& data);

/// Inverse of vec_omega: writes values back into an n x m matrix, filling
/// unobserved cells with `fill`.
Matrix scatter_omega(const ObservationMask& mask, const Vector& values,
                     double fill = std::numeric_limits<double>::quiet_NaN());

}  // namespace flowmc
