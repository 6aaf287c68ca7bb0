#pragma once

#include <vector>

#include "flowmc/graph.hpp"

namespace flowmc {

/// Edge-disjoint paths from row vertex u_i to column vertex v_j.
struct PathSet {
    std::vector<Path> paths;
    int k = 0;
    int max_len = 0;  // longest path, in edges
};

/// Minimum u_i / v_j edge cut. left_side holds the vertices reachable from u_i
/// in the residual graph of a maximum flow.
struct CutCertificate {
    std::vector<int> left_side;
    std::vector<Entry> cut_edges;
};

struct DisjointPathResult {
    PathSet path_set;
    CutCertificate cut;
};

/// Unit-capacity max flow from u_i to v_j on the doubly-oriented graph (arcs
/// into u_i and out of v_j removed), shortest augmenting paths with neighbours
/// scanned in ascending order. Antiparallel flow is cancelled and the
/// remaining flow is decomposed into paths, discarding cycles.
DisjointPathResult disjoint_paths_and_cut(const BipartiteGraph& graph, int i, int j);

PathSet max_disjoint_paths(const BipartiteGraph& graph, int i, int j);

CutCertificate min_cut(const BipartiteGraph& graph, int i, int j);

}  // namespace flowmc
