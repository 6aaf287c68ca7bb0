#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "flowmc/common.hpp"
#include "flowmc/graph.hpp"
#include "flowmc/maxflow.hpp"

namespace flowmc {

/// M*_{ij} = row_factors_i * col_factors_j.
struct RankOneModel {
    Vector row_factors;
    Vector col_factors;

    Matrix matrix() const { return row_factors * col_factors.transpose(); }
};

/// Products of the observations on one path: alpha over row->column steps,
/// beta over column->row steps (1 for a single-edge path).
struct PathStatistics {
    double alpha = 1.0;
    double beta = 1.0;
    int length = 0;
};

PathStatistics path_alpha_beta(const BipartiteGraph& graph, const Path& path, const Matrix& data);

inline constexpr double kDenominatorFloor = 1e-12;

enum class Rank1Status {
    ok,
    no_path,                // K = 0: unidentifiable
    degenerate_denominator  // mean of beta^2 below kDenominatorFloor
};

struct Rank1Entry {
    Rank1Status status = Rank1Status::no_path;
    double value = 0.0;  // meaningful only when status == ok
    int k = 0;
    int max_len = 0;
};

/// (mean_k alpha_k beta_k) / (mean_k beta_k^2) over the given disjoint paths.
Rank1Entry rank1_entry(const BipartiteGraph& graph, const Matrix& data, const PathSet& paths);

struct Rank1Report {
    EstimateGrid estimates;  // nullopt unless status is ok
    Grid<Rank1Status> status;
    Grid<int> k;
    Grid<int> max_len;
};

/// Path sets for every entry of a fixed pattern, computed once and reused
/// across data draws.
class PathEstimator {
public:
    explicit PathEstimator(const ObservationMask& mask);

    const PathSet& paths(int i, int j) const { return paths_(i, j); }
    const BipartiteGraph& graph() const { return graph_; }

    Rank1Entry estimate_entry(const Matrix& data, int i, int j) const;
    Rank1Report estimate(const Matrix& data) const;

private:
    BipartiteGraph graph_;
    Grid<PathSet> paths_;
};

Rank1Report rank1_full(const ObservationMask& mask, const Matrix& data);

/// C sigma^L (1 + m_inf^L) sqrt(2^L log^{L+1}(nm/delta) / K).
double rank1_error_bound(int k, int max_len, double sigma, double m_inf, int n, int m, double delta,
                         double constant = 1.0);

/// Pair of rank-one models that agree on every observed entry except the
/// (i,j) minimum cut edges: A = (eps 1)(eps 1)^T, B = y z^T with +eps on the
/// u_i side of the cut and -eps on the other side.
std::pair<RankOneModel, RankOneModel> hard_instance_rank1(const BipartiteGraph& graph, int i, int j,
                                                          double epsilon);

}  // namespace flowmc
