#include "flowmc/additive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flowmc {

Matrix AdditiveModel::matrix() const {
    return row_effects * Vector::Ones(col_effects.size()).transpose() +
           Vector::Ones(row_effects.size()) * col_effects.transpose();
}

double path_estimate_additive(const BipartiteGraph& graph, const Path& path, const Matrix& data) {
    check_path(graph, path);
    if (data.rows() != graph.n_left() || data.cols() != graph.n_right())
        throw DimensionMismatch("data does not match graph dimensions");
    double sum = 0.0;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const int a = path[s];
        const int b = path[s + 1];
        if (graph.is_left(a))
            sum += data(a, b - graph.n_left());
        else
            sum -= data(b, a - graph.n_left());
    }
    return sum;
}

double unit_flow_estimate(const UnitFlow& flow, const BipartiteGraph& graph, const Matrix& data) {
    if (!verify_unit_flow(flow, graph, flow.source, flow.sink))
        throw InvalidFlow("not a unit flow from row " + std::to_string(flow.source) +
                          " to column " + std::to_string(flow.sink));
    return flow.values.dot(vec_omega(graph.mask(), data));
}

double efe_entry(const BipartiteGraph& graph, const SpectralCore& core, const Matrix& data, int i,
                 int j) {
    return electrical_flow(graph, core, i, j).values.dot(vec_omega(graph.mask(), data));
}

namespace {

// (diag(Omega M^T); diag(Omega^T M)) over observed cells only.
Vector observed_sums(const ObservationMask& mask, const Matrix& data) {
    if (data.rows() != mask.n_rows() || data.cols() != mask.n_cols())
        throw DimensionMismatch("data does not match mask dimensions");
    Vector s = Vector::Zero(mask.n_rows() + mask.n_cols());
    for (const auto& [i, j] : mask.entries()) {
        s(i) += data(i, j);
        s(mask.n_rows() + j) += data(i, j);
    }
    return s;
}

Matrix signed_blocks(const Matrix& pinv, int n, int m) {
    const auto g = partition_blocks(pinv, n, m);
    Matrix out(n + m, n + m);
    out << g.g11, -g.g12, -g.g21, g.g22;
    return out;
}

}  // namespace

LseFactors lse_factors(const BipartiteGraph& graph, const SpectralCore& core, const Matrix& data) {
    const int n = graph.n_left();
    const int m = graph.n_right();
    const Vector x = signed_blocks(core.pinv(), n, m) * observed_sums(graph.mask(), data);
    return {x.head(n), x.tail(m)};
}

LseFactors lse_factors(const ObservationMask& mask, const Matrix& data) {
    const BipartiteGraph graph(mask);
    const SpectralCore core(graph);
    return lse_factors(graph, core, data);
}

ElectricalFlowEstimator::ElectricalFlowEstimator(const ObservationMask& mask, double rank_tolerance)
    : mask_(mask) {
    const BipartiteGraph graph(mask);
    components_ = connected_components(graph);
    const Matrix lap = laplacian(graph);
    const int n = graph.n_left();

    for (int c = 0; c < components_.component_count; ++c) {
        Component part;
        for (int v : components_.members(c)) {
            if (graph.is_left(v))
                part.rows.push_back(v);
            else
                part.cols.push_back(v - n);
        }
        const int nr = static_cast<int>(part.rows.size());
        const int nc = static_cast<int>(part.cols.size());
        if (nr == 0 || nc == 0) continue;  // isolated vertex, nothing to estimate

        // Component vertices keep the global ordering: rows, then columns.
        std::vector<int> verts(part.rows);
        for (int j : part.cols) verts.push_back(n + j);
        Matrix sub(nr + nc, nr + nc);
        for (int a = 0; a < nr + nc; ++a)
            for (int b = 0; b < nr + nc; ++b) sub(a, b) = lap(verts[a], verts[b]);

        if (count_zero_eigenvalues(sub, rank_tolerance) != 1)
            throw NumericalError("component Laplacian has unexpected null space");
        part.signed_pinv = signed_blocks(pseudo_inverse(sub, rank_tolerance), nr, nc);
        parts_.push_back(std::move(part));
    }
}

void ElectricalFlowEstimator::fill(const Matrix& data, Matrix& out) const {
    if (data.rows() != mask_.n_rows() || data.cols() != mask_.n_cols())
        throw DimensionMismatch("data does not match mask dimensions");
    out.setConstant(mask_.n_rows(), mask_.n_cols(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& part : parts_) {
        const int nr = static_cast<int>(part.rows.size());
        const int nc = static_cast<int>(part.cols.size());
        Vector sums = Vector::Zero(nr + nc);
        for (int a = 0; a < nr; ++a) {
            for (int b = 0; b < nc; ++b) {
                if (!mask_.observed(part.rows[a], part.cols[b])) continue;
                const double y = data(part.rows[a], part.cols[b]);
                sums(a) += y;
                sums(nr + b) += y;
            }
        }
        const Vector x = part.signed_pinv * sums;
        for (int a = 0; a < nr; ++a)
            for (int b = 0; b < nc; ++b) out(part.rows[a], part.cols[b]) = x(a) + x(nr + b);
    }
}

Matrix ElectricalFlowEstimator::estimate_dense(const Matrix& data) const {
    Matrix out;
    fill(data, out);
    return out;
}

EstimateGrid ElectricalFlowEstimator::estimate(const Matrix& data) const {
    const Matrix dense = estimate_dense(data);
    EstimateGrid out(mask_.n_rows(), mask_.n_cols(), std::nullopt);
    for (int i = 0; i < dense.rows(); ++i)
        for (int j = 0; j < dense.cols(); ++j)
            if (!std::isnan(dense(i, j))) out(i, j) = dense(i, j);
    return out;
}

ResistanceGrid ElectricalFlowEstimator::resistances() const {
    ResistanceGrid out(mask_.n_rows(), mask_.n_cols(), Resistance::infinite());
    for (const auto& part : parts_) {
        const int nr = static_cast<int>(part.rows.size());
        const int nc = static_cast<int>(part.cols.size());
        const auto& s = part.signed_pinv;
        for (int a = 0; a < nr; ++a)
            for (int b = 0; b < nc; ++b)
                out(part.rows[a], part.cols[b]) =
                    Resistance::finite(s(a, a) + s(nr + b, nr + b) + 2.0 * s(a, nr + b));
    }
    return out;
}

EstimateReport efe_full(const ObservationMask& mask, const Matrix& data,
                        std::optional<double> sigma, std::optional<double> delta) {
    if (sigma && *sigma < 0.0) throw InvalidArgument("sigma must be non-negative");
    if (delta && !(*delta > 0.0 && *delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");

    const ElectricalFlowEstimator estimator(mask);
    EstimateReport report{estimator.estimate(data), estimator.resistances(), std::nullopt,
                          std::nullopt};
    const int n = mask.n_rows();
    const int m = mask.n_cols();
    if (sigma) {
        const double s2 = *sigma * *sigma;
        report.variance_bound = EstimateGrid(n, m, std::nullopt);
        if (delta) report.high_prob_bound = EstimateGrid(n, m, std::nullopt);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
                const auto& r = report.resistance(i, j);
                if (!r.is_finite()) continue;
                (*report.variance_bound)(i, j) = s2 * r.value();
                if (delta)
                    (*report.high_prob_bound)(i, j) =
                        2.0 * s2 * r.value() * std::log(2.0 * n * m / *delta);
            }
        }
    }
    return report;
}

double equivalence_gap(const ObservationMask& mask, const Matrix& data) {
    const BipartiteGraph graph(mask);
    const SpectralCore core(graph);
    const auto factors = lse_factors(graph, core, data);
    const Vector y = vec_omega(mask, data);
    double gap = 0.0;
    for (int i = 0; i < mask.n_rows(); ++i) {
        for (int j = 0; j < mask.n_cols(); ++j) {
            if (!core.connected(i, j)) continue;
            const double efe = electrical_flow(graph, core, i, j).values.dot(y);
            gap = std::max(gap, std::abs(efe - (factors.row(i) + factors.col(j))));
        }
    }
    return gap;
}

bool verify_equivalence(const ObservationMask& mask, const Matrix& data, double tol) {
    return equivalence_gap(mask, data) < tol;
}

AdditiveModel hard_instance_additive(const AdditiveModel& base, const BipartiteGraph& graph,
                                     const SpectralCore& core, int i, int j, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0,1)");
    if (base.row_effects.size() != graph.n_left() || base.col_effects.size() != graph.n_right())
        throw DimensionMismatch("base model does not match graph dimensions");
    const Vector v = voltage_vector(core, i, j).potentials;
    AdditiveModel alt = base;
    alt.row_effects += epsilon * v.head(graph.n_left());
    alt.col_effects -= epsilon * v.tail(graph.n_right());
    return alt;
}

double observed_squared_difference(const ObservationMask& mask, const Matrix& a, const Matrix& b) {
    return (vec_omega(mask, a) - vec_omega(mask, b)).squaredNorm();
}

std::optional<double> estimate_noise_variance(const ObservationMask& mask, const Matrix& data) {
    const BipartiteGraph graph(mask);
    const auto components = connected_components(graph);
    const long dof = static_cast<long>(mask.count()) -
                     (graph.n_vertices() - components.component_count);
    if (dof <= 0) return std::nullopt;
    const Matrix fitted = ElectricalFlowEstimator(mask).estimate_dense(data);
    double rss = 0.0;
    for (const auto& [i, j] : mask.entries()) rss += std::pow(data(i, j) - fitted(i, j), 2);
    return rss / static_cast<double>(dof);
}

}  // namespace flowmc
