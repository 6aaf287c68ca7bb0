#include "flowmc/maxflow.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace flowmc {

namespace {

struct Arc {
    int to;
    int cap;
    int rev;        // index of the paired residual arc in adjacency[to]
    bool original;  // false for residual-only arcs
};

class UnitFlowNetwork {
public:
    UnitFlowNetwork(const BipartiteGraph& graph, int source, int sink)
        : source_(source), sink_(sink), adj_(graph.n_vertices()) {
        for (int x = 0; x < graph.n_vertices(); ++x) {
            for (int y : graph.neighbors(x)) {
                if (y == source || x == sink) continue;  // no arcs into u_i or out of v_j
                add_arc(x, y);
            }
        }
        for (auto& list : adj_) {
            // Stable order for BFS: by head vertex, original arcs first.
            std::vector<int> order(list.size());
            for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                if (list[a].to != list[b].to) return list[a].to < list[b].to;
                return list[a].original && !list[b].original;
            });
            position_.emplace_back(order);
        }
    }

    int run() {
        int flow = 0;
        const int nv = static_cast<int>(adj_.size());
        std::vector<std::pair<int, int>> parent(nv);  // (vertex, arc index)
        while (true) {
            std::fill(parent.begin(), parent.end(), std::pair{-1, -1});
            parent[source_] = {source_, -1};
            std::queue<int> q;
            q.push(source_);
            while (!q.empty() && parent[sink_].first == -1) {
                const int x = q.front();
                q.pop();
                for (int k : position_[x]) {
                    const Arc& a = adj_[x][k];
                    if (a.cap > 0 && parent[a.to].first == -1) {
                        parent[a.to] = {x, k};
                        q.push(a.to);
                    }
                }
            }
            if (parent[sink_].first == -1) break;
            for (int v = sink_; v != source_;) {
                const auto [u, k] = parent[v];
                Arc& a = adj_[u][k];
                a.cap -= 1;
                adj_[v][a.rev].cap += 1;
                v = u;
            }
            ++flow;
        }
        return flow;
    }

    /// Unit flow on original arc x -> y (0 or 1).
    int flow_on(int x, int y) const {
        for (const Arc& a : adj_[x])
            if (a.original && a.to == y) return 1 - a.cap;
        return 0;
    }

    std::vector<char> residual_reachable() const {
        std::vector<char> seen(adj_.size(), 0);
        std::queue<int> q;
        seen[source_] = 1;
        q.push(source_);
        while (!q.empty()) {
            const int x = q.front();
            q.pop();
            for (const Arc& a : adj_[x]) {
                if (a.cap > 0 && !seen[a.to]) {
                    seen[a.to] = 1;
                    q.push(a.to);
                }
            }
        }
        return seen;
    }

private:
    void add_arc(int x, int y) {
        const int kx = static_cast<int>(adj_[x].size());
        const int ky = static_cast<int>(adj_[y].size());
        adj_[x].push_back({y, 1, ky, true});
        adj_[y].push_back({x, 0, kx, false});
    }

    int source_;
    int sink_;
    std::vector<std::vector<Arc>> adj_;
    std::vector<std::vector<int>> position_;
};

}  // namespace

DisjointPathResult disjoint_paths_and_cut(const BipartiteGraph& graph, int i, int j) {
    if (i < 0 || i >= graph.n_left() || j < 0 || j >= graph.n_right())
        throw InvalidArgument("pair (" + std::to_string(i) + "," + std::to_string(j) +
                              ") out of range");
    const int s = graph.row_vertex(i);
    const int t = graph.col_vertex(j);
    const int nv = graph.n_vertices();

    UnitFlowNetwork network(graph, s, t);
    const int k = network.run();

    // Flow as sorted successor lists, after cancelling antiparallel pairs.
    std::vector<std::vector<int>> out(nv);
    for (int x = 0; x < nv; ++x) {
        for (int y : graph.neighbors(x)) {
            if (network.flow_on(x, y) == 1 && network.flow_on(y, x) == 0) out[x].push_back(y);
        }
    }

    DisjointPathResult result;
    auto& set = result.path_set;
    while (static_cast<int>(set.paths.size()) < k) {
        Path walk{s};
        std::vector<int> position(nv, -1);
        position[s] = 0;
        while (walk.back() != t) {
            const int x = walk.back();
            if (out[x].empty()) throw Error("flow decomposition stalled");  // conservation violated
            const int y = out[x].front();
            if (position[y] >= 0) {
                // Cycle y -> ... -> x -> y: drop its flow and restart.
                for (std::size_t p = static_cast<std::size_t>(position[y]); p < walk.size(); ++p) {
                    const int a = walk[p];
                    const int b = p + 1 < walk.size() ? walk[p + 1] : y;
                    out[a].erase(std::find(out[a].begin(), out[a].end(), b));
                }
                walk.assign(1, s);
                std::fill(position.begin(), position.end(), -1);
                position[s] = 0;
                continue;
            }
            position[y] = static_cast<int>(walk.size());
            walk.push_back(y);
        }
        for (std::size_t p = 0; p + 1 < walk.size(); ++p)
            out[walk[p]].erase(std::find(out[walk[p]].begin(), out[walk[p]].end(), walk[p + 1]));
        set.max_len = std::max(set.max_len, path_length(walk));
        set.paths.push_back(std::move(walk));
    }
    set.k = k;

    const auto reach = network.residual_reachable();
    for (int v = 0; v < nv; ++v)
        if (reach[v]) result.cut.left_side.push_back(v);
    for (const auto& [r, c] : graph.edges())
        if (reach[graph.row_vertex(r)] != reach[graph.col_vertex(c)]) result.cut.cut_edges.push_back({r, c});
    return result;
}

PathSet max_disjoint_paths(const BipartiteGraph& graph, int i, int j) {
    return disjoint_paths_and_cut(graph, i, j).path_set;
}

CutCertificate min_cut(const BipartiteGraph& graph, int i, int j) {
    return disjoint_paths_and_cut(graph, i, j).cut;
}

}  // namespace flowmc
