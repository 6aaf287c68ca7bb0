#pragma once

#include "flowmc/common.hpp"
#include "flowmc/graph.hpp"
#include "flowmc/spectral.hpp"

namespace flowmc {

inline constexpr double kDefaultFlowTolerance = 1e-9;

/// Edge flow from row vertex `source` to column vertex `sink`. values[e] is
/// positive when flow on edge e runs from its row end to its column end.
struct UnitFlow {
    Vector values;
    int source = 0;  // row index i
    int sink = 0;    // column index j
};

/// Vertex potentials; zero mean on each component.
struct VoltageVector {
    Vector potentials;
};

/// Potentials L^+(e_i - e_{n+j}). Throws DisconnectedPair.
VoltageVector voltage_vector(const SpectralCore& core, int i, int j);

/// Unit electrical current between row i and column j (Ohm's law on unit
/// resistances). Throws DisconnectedPair.
UnitFlow electrical_flow(const BipartiteGraph& graph, const SpectralCore& core, int i, int j);

/// (e_i - e_{n+j})^T L^+ (e_i - e_{n+j}); infinite for disconnected pairs.
Resistance effective_resistance(const SpectralCore& core, int i, int j);

/// Resistances for every (row, column) pair.
ResistanceGrid all_resistances(const SpectralCore& core);

/// Sum of squared edge values.
double flow_energy(const UnitFlow& flow);

/// Per-vertex net out-flow (B^T f). Source should read +1, sink -1.
Vector net_outflow(const BipartiteGraph& graph, const Vector& values);

/// True iff the flow routes one unit from row i to column j with conservation
/// at every other vertex, each constraint within `tol`.
bool verify_unit_flow(const UnitFlow& flow, const BipartiteGraph& graph, int i, int j,
                      double tol = kDefaultFlowTolerance);

/// Adds the projection of `direction` onto the cycle space (kernel of B^T) to
/// `flow`. The result is again a unit flow between the same endpoints.
UnitFlow add_circulation(const BipartiteGraph& graph, const SpectralCore& core,
                         const UnitFlow& flow, const Vector& direction);

/// Flow that sends one unit along a single path given as alternating vertex ids.
UnitFlow path_flow(const BipartiteGraph& graph, const std::vector<int>& path);

}  // namespace flowmc
