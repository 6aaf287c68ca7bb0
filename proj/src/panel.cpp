#include "flowmc/panel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "flowmc/electrical.hpp"

namespace flowmc {

namespace {

void check_panel(const PanelData& panel) {
    const int n = panel.observed.n_rows();
    const int t = panel.observed.n_cols();
    if (panel.outcomes.rows() != n || panel.outcomes.cols() != t || panel.treated.rows() != n ||
        panel.treated.cols() != t)
        throw DimensionMismatch("outcomes, treatment and observation pattern differ in shape");
}

}  // namespace

std::pair<ObservationMask, ObservationMask> split_masks(const PanelData& panel) {
    check_panel(panel);
    std::vector<Entry> control;
    std::vector<Entry> treated;
    for (const auto& e : panel.observed.entries())
        (panel.treated(e.row, e.col) ? treated : control).push_back(e);
    const int n = panel.units();
    const int t = panel.periods();
    return {ObservationMask::from_entries(n, t, control), ObservationMask::from_entries(n, t, treated)};
}

CausalReport estimate_effects(const PanelData& panel, std::optional<double> sigma,
                              std::optional<double> delta, double bound_constant) {
    const auto [control_mask, treated_mask] = split_masks(panel);
    const ElectricalFlowEstimator control(control_mask);
    const ElectricalFlowEstimator treatment(treated_mask);

    const int n = panel.units();
    const int t = panel.periods();
    CausalReport r{EstimateGrid(n, t, std::nullopt),
                   control.estimate(panel.outcomes),
                   treatment.estimate(panel.outcomes),
                   control.resistances(),
                   treatment.resistances(),
                   ResistanceGrid(n, t, Resistance::infinite()),
                   std::nullopt};
    const bool with_bound = sigma.has_value() && delta.has_value();
    if (with_bound) r.high_prob_bound = EstimateGrid(n, t, std::nullopt);
    for (int i = 0; i < n; ++i) {
        for (int s = 0; s < t; ++s) {
            r.resistance_sum(i, s) = r.control_resistance(i, s) + r.treatment_resistance(i, s);
            const auto& f = r.control_estimates(i, s);
            const auto& g = r.treatment_estimates(i, s);
            if (!f || !g) continue;
            r.beta_hat(i, s) = *g - *f;
            if (with_bound)
                (*r.high_prob_bound)(i, s) = bound_constant * *sigma * *sigma *
                                             r.resistance_sum(i, s).value() *
                                             std::log(static_cast<double>(n) * t / *delta);
        }
    }
    return r;
}

std::optional<std::pair<int, int>> find_length_three_path(const ObservationMask& mask, int i, int t) {
    for (int tp = 0; tp < mask.n_cols(); ++tp) {
        if (tp == t || !mask.observed(i, tp)) continue;
        for (int j = 0; j < mask.n_rows(); ++j) {
            if (j == i) continue;
            if (mask.observed(j, tp) && mask.observed(j, t)) return std::pair{tp, j};
        }
    }
    return std::nullopt;
}

std::optional<double> did_estimate(const PanelData& panel, int i, int t) {
    check_panel(panel);
    if (!panel.observed.observed(i, t) || !panel.treated(i, t))
        throw TargetNotTreated("cell (" + std::to_string(i) + "," + std::to_string(t) +
                               ") is not an observed treated cell");
    const auto control = split_masks(panel).first;
    const auto path = find_length_three_path(control, i, t);
    if (!path) return std::nullopt;
    const auto [tp, j] = *path;
    const auto& y = panel.outcomes;
    return (y(i, t) - y(j, t)) - (y(i, tp) - y(j, tp));
}

EstimateGrid twfe_beta(const PanelData& panel) { return estimate_effects(panel).beta_hat; }

Matrix twfe_regression_lse(const PanelData& panel) {
    check_panel(panel);
    const int n = panel.units();
    const int t = panel.periods();
    const auto cells = panel.observed.entries();
    // Columns: alpha (n), gamma (t), mu (n), nu (t).
    Matrix design = Matrix::Zero(static_cast<Eigen::Index>(cells.size()), 2 * (n + t));
    Vector y(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const auto [i, s] = cells[r];
        const auto row = static_cast<Eigen::Index>(r);
        design(row, i) = 1.0;
        design(row, n + s) = 1.0;
        if (panel.treated(i, s)) {
            design(row, n + t + i) = 1.0;
            design(row, 2 * n + t + s) = 1.0;
        }
        y(row) = panel.outcomes(i, s);
    }
    const Vector theta = design.completeOrthogonalDecomposition().solve(y);
    Matrix beta(n, t);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < t; ++s) beta(i, s) = theta(n + t + i) + theta(2 * n + t + s);
    return beta;
}

Grid<char> staggered_exposure_treatment(int n, int groups, bool wrap_around) {
    if (n <= 0 || groups <= 0 || n % groups != 0)
        throw InvalidArgument("group count " + std::to_string(groups) + " must divide " +
                              std::to_string(n));
    const int h = n / groups;
    Grid<char> x(n, n, 0);
    for (int i = 0; i < n; ++i) {
        const int g = i / h;
        for (int s = 0; s < n; ++s) {
            const int c = s / h;
            bool on = c == g || c == g + 1;
            if (wrap_around && g + 1 == groups) on = on || c == 0;
            x(i, s) = on ? 1 : 0;
        }
    }
    return x;
}

StaggeredCertificate staggered_exposure_certificate(int n, int groups) {
    const auto x = staggered_exposure_treatment(n, groups);
    const int h = n / groups;
    PanelData panel{Matrix::Zero(n, n), x, ObservationMask::full(n, n)};
    const auto [control_mask, treated_mask] = split_masks(panel);

    const BipartiteGraph control_graph(control_mask);
    const BipartiteGraph treated_graph(treated_mask);
    const SpectralCore control_core(control_graph);
    const SpectralCore treated_core(treated_graph);

    StaggeredCertificate cert{effective_resistance(treated_core, 0, n - 1),
                              effective_resistance(control_core, 0, n - 1),
                              2.0 * groups * groups / n,
                              std::numeric_limits<double>::infinity()};
    if ((n - h) / (2 * h) >= 1) cert.control_bound = 6.0 / (n - h);
    return cert;
}

}  // namespace flowmc
