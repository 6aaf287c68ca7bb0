#pragma once

#include <optional>
#include <utility>

#include "flowmc/additive.hpp"
#include "flowmc/common.hpp"
#include "flowmc/graph.hpp"

namespace flowmc {

/// Outcomes Y, binary treatment X and observation pattern for N units over T periods.
struct PanelData {
    Matrix outcomes;
    Grid<char> treated;
    ObservationMask observed;

    int units() const { return observed.n_rows(); }
    int periods() const { return observed.n_cols(); }
};

class TargetNotTreated : public Error {
public:
    using Error::Error;
};

/// Control (observed & untreated) and treated (observed & treated) patterns.
std::pair<ObservationMask, ObservationMask> split_masks(const PanelData& panel);

struct CausalReport {
    EstimateGrid beta_hat;
    EstimateGrid control_estimates;    // F hat
    EstimateGrid treatment_estimates;  // G hat
    ResistanceGrid control_resistance;
    ResistanceGrid treatment_resistance;
    ResistanceGrid resistance_sum;
    std::optional<EstimateGrid> high_prob_bound;  // C sigma^2 (R0 + R1) log(NT/delta)
};

inline constexpr double kPanelBoundConstant = 2.0;

/// Electrical flow estimates on the control and treated graphs and their
/// difference. The bound grid is filled when both sigma and delta are given.
CausalReport estimate_effects(const PanelData& panel, std::optional<double> sigma = std::nullopt,
                              std::optional<double> delta = std::nullopt,
                              double bound_constant = kPanelBoundConstant);

/// Length-3 path u_i -> v_t' -> u_j -> v_t in `mask`, choosing the
/// lexicographically smallest (t', j). Returns {t', j}.
std::optional<std::pair<int, int>> find_length_three_path(const ObservationMask& mask, int i, int t);

/// Difference-in-differences estimate of beta_{it} for a treated cell from
/// the smallest length-3 control path: (Y_it - Y_jt) - (Y_it' - Y_jt').
/// nullopt when no such path exists. Throws TargetNotTreated when (i,t) is
/// not an observed treated cell.
std::optional<double> did_estimate(const PanelData& panel, int i, int t);

/// Heterogeneous TWFE effects mu_i + nu_t via the electrical flow route.
EstimateGrid twfe_beta(const PanelData& panel);

/// Direct minimum-norm least-squares solution of the heterogeneous TWFE
/// regression over (alpha, gamma, mu, nu); returns mu_i + nu_t for every cell.
/// Only cells identifiable in both graphs are meaningful.
Matrix twfe_regression_lse(const PanelData& panel);

struct StaggeredCertificate {
    Resistance treatment_resistance;  // R on the treated graph between u_1 and v_T
    Resistance control_resistance;
    double treatment_bound;  // 2 G^2 / N
    double control_bound;    // 6 / (N - H); +inf when no control clique exists (G < 3)

    bool treatment_bound_holds() const {
        return treatment_resistance.is_finite() && treatment_resistance.value() <= treatment_bound;
    }
    bool control_bound_holds() const {
        return control_resistance.as_double() <= control_bound;
    }
};

/// Staggered exposure pattern: N units and N periods split into G groups of
/// H = N/G; unit group g is treated during period groups g and g+1. With
/// wrap_around the last group's second window is period group 1; otherwise
/// the last group is treated in its own window only.
Grid<char> staggered_exposure_treatment(int n, int groups, bool wrap_around = false);

/// Exact resistances between the first unit and the last period in both
/// graphs of the staggered exposure pattern, together with the flow bounds.
/// Throws InvalidArgument when G does not divide N.
StaggeredCertificate staggered_exposure_certificate(int n, int groups);

}  // namespace flowmc
