#include "flowmc/electrical.hpp"

#include <cmath>
#include <string>

namespace flowmc {

namespace {

void check_indices(const SpectralCore& core, int i, int j) {
    if (i < 0 || i >= core.n() || j < 0 || j >= core.m())
        throw InvalidArgument("pair (" + std::to_string(i) + "," + std::to_string(j) +
                              ") out of range");
}

}  // namespace

VoltageVector voltage_vector(const SpectralCore& core, int i, int j) {
    check_indices(core, i, j);
    if (!core.connected(i, j)) throw DisconnectedPair(i, j);
    const int t = core.n() + j;
    return {core.pinv().col(i) - core.pinv().col(t)};
}

UnitFlow electrical_flow(const BipartiteGraph& graph, const SpectralCore& core, int i, int j) {
    const auto v = voltage_vector(core, i, j);
    UnitFlow f{Vector(graph.n_edges()), i, j};
    for (int e = 0; e < graph.n_edges(); ++e) {
        const auto [r, c] = graph.edges()[e];
        f.values(e) = v.potentials(graph.row_vertex(r)) - v.potentials(graph.col_vertex(c));
    }
    return f;
}

Resistance effective_resistance(const SpectralCore& core, int i, int j) {
    check_indices(core, i, j);
    if (!core.connected(i, j)) return Resistance::infinite();
    const auto& p = core.pinv();
    const int t = core.n() + j;
    return Resistance::finite(p(i, i) + p(t, t) - 2.0 * p(i, t));
}

ResistanceGrid all_resistances(const SpectralCore& core) {
    ResistanceGrid out(core.n(), core.m(), Resistance::infinite());
    for (int i = 0; i < core.n(); ++i)
        for (int j = 0; j < core.m(); ++j) out(i, j) = effective_resistance(core, i, j);
    return out;
}

double flow_energy(const UnitFlow& flow) { return flow.values.squaredNorm(); }

Vector net_outflow(const BipartiteGraph& graph, const Vector& values) {
    if (values.size() != graph.n_edges())
        throw DimensionMismatch("flow has " + std::to_string(values.size()) + " values for " +
                                std::to_string(graph.n_edges()) + " edges");
    Vector net = Vector::Zero(graph.n_vertices());
    for (int e = 0; e < graph.n_edges(); ++e) {
        const auto [r, c] = graph.edges()[e];
        net(graph.row_vertex(r)) += values(e);
        net(graph.col_vertex(c)) -= values(e);
    }
    return net;
}

bool verify_unit_flow(const UnitFlow& flow, const BipartiteGraph& graph, int i, int j,
                      double tol) {
    if (flow.values.size() != graph.n_edges()) return false;
    if (i < 0 || i >= graph.n_left() || j < 0 || j >= graph.n_right()) return false;
    const Vector net = net_outflow(graph, flow.values);
    for (int v = 0; v < graph.n_vertices(); ++v) {
        double expected = 0.0;
        if (v == graph.row_vertex(i)) expected = 1.0;
        if (v == graph.col_vertex(j)) expected = -1.0;
        if (!(std::abs(net(v) - expected) <= tol)) return false;
    }
    return true;
}

UnitFlow add_circulation(const BipartiteGraph& graph, const SpectralCore& core,
                         const UnitFlow& flow, const Vector& direction) {
    if (direction.size() != graph.n_edges())
        throw DimensionMismatch("direction length does not match edge count");
    const Matrix b = incidence_matrix(graph);
    // I - B L^+ B^T projects onto the kernel of B^T.
    const Vector cut_part = b * (core.pinv() * (b.transpose() * direction));
    UnitFlow out = flow;
    out.values += direction - cut_part;
    return out;
}

UnitFlow path_flow(const BipartiteGraph& graph, const std::vector<int>& path) {
    if (path.size() < 2 || !graph.is_left(path.front()) || graph.is_left(path.back()))
        throw InvalidPath("path must run from a row vertex to a column vertex");
    UnitFlow f{Vector::Zero(graph.n_edges()), path.front(), path.back() - graph.n_left()};
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const int a = path[s];
        const int b = path[s + 1];
        const bool forward = graph.is_left(a);
        if (forward == graph.is_left(b)) throw InvalidPath("path does not alternate sides");
        const int row = forward ? a : b;
        const int col = (forward ? b : a) - graph.n_left();
        const int e = graph.edge_index(row, col);
        if (e < 0) throw InvalidPath("path uses an unobserved entry");
        f.values(e) += forward ? 1.0 : -1.0;
    }
    return f;
}

}  // namespace flowmc
