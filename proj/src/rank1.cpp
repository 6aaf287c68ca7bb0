#include "flowmc/rank1.hpp"

#include <cmath>
#include <string>

namespace flowmc {

PathStatistics path_alpha_beta(const BipartiteGraph& graph, const Path& path, const Matrix& data) {
    check_path(graph, path);
    if (data.rows() != graph.n_left() || data.cols() != graph.n_right())
        throw DimensionMismatch("data does not match graph dimensions");
    PathStatistics st;
    st.length = path_length(path);
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const int a = path[s];
        const int b = path[s + 1];
        if (graph.is_left(a))
            st.alpha *= data(a, b - graph.n_left());
        else
            st.beta *= data(b, a - graph.n_left());
    }
    return st;
}

Rank1Entry rank1_entry(const BipartiteGraph& graph, const Matrix& data, const PathSet& paths) {
    Rank1Entry out;
    out.k = paths.k;
    out.max_len = paths.max_len;
    if (paths.k == 0) {
        out.status = Rank1Status::no_path;
        return out;
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : paths.paths) {
        const auto st = path_alpha_beta(graph, p, data);
        num += st.alpha * st.beta;
        den += st.beta * st.beta;
    }
    num /= paths.k;
    den /= paths.k;
    if (den < kDenominatorFloor) {
        out.status = Rank1Status::degenerate_denominator;
        return out;
    }
    out.status = Rank1Status::ok;
    out.value = num / den;
    return out;
}

PathEstimator::PathEstimator(const ObservationMask& mask)
    : graph_(mask), paths_(mask.n_rows(), mask.n_cols()) {
    for (int i = 0; i < mask.n_rows(); ++i)
        for (int j = 0; j < mask.n_cols(); ++j) paths_(i, j) = max_disjoint_paths(graph_, i, j);
}

Rank1Entry PathEstimator::estimate_entry(const Matrix& data, int i, int j) const {
    return rank1_entry(graph_, data, paths_(i, j));
}

Rank1Report PathEstimator::estimate(const Matrix& data) const {
    const int n = graph_.n_left();
    const int m = graph_.n_right();
    Rank1Report r{EstimateGrid(n, m, std::nullopt), Grid<Rank1Status>(n, m, Rank1Status::no_path),
                  Grid<int>(n, m, 0), Grid<int>(n, m, 0)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const auto e = estimate_entry(data, i, j);
            r.status(i, j) = e.status;
            r.k(i, j) = e.k;
            r.max_len(i, j) = e.max_len;
            if (e.status == Rank1Status::ok) r.estimates(i, j) = e.value;
        }
    }
    return r;
}

Rank1Report rank1_full(const ObservationMask& mask, const Matrix& data) {
    return PathEstimator(mask).estimate(data);
}

double rank1_error_bound(int k, int max_len, double sigma, double m_inf, int n, int m, double delta,
                         double constant) {
    if (k < 1) throw InvalidArgument("error bound needs at least one path");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
    const double len = max_len;
    const double log_term = std::log(static_cast<double>(n) * m / delta);
    return constant * std::pow(sigma, len) * (1.0 + std::pow(m_inf, len)) *
           std::sqrt(std::pow(2.0, len) * std::pow(log_term, len + 1.0) / k);
}

std::pair<RankOneModel, RankOneModel> hard_instance_rank1(const BipartiteGraph& graph, int i, int j,
                                                          double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0,1)");
    const auto cut = min_cut(graph, i, j);
    std::vector<char> left(graph.n_vertices(), 0);
    for (int v : cut.left_side) left[v] = 1;
    if (left[graph.col_vertex(j)]) throw DisconnectedPair(i, j);  // unreachable for a valid cut
    if (cut.cut_edges.empty()) throw DisconnectedPair(i, j);

    const int n = graph.n_left();
    const int m = graph.n_right();
    RankOneModel a{Vector::Constant(n, epsilon), Vector::Constant(m, epsilon)};
    RankOneModel b{Vector(n), Vector(m)};
    for (int r = 0; r < n; ++r) b.row_factors(r) = left[graph.row_vertex(r)] ? epsilon : -epsilon;
    for (int c = 0; c < m; ++c) b.col_factors(c) = left[graph.col_vertex(c)] ? epsilon : -epsilon;
    return {a, b};
}

}  // namespace flowmc
