#pragma once

#include <optional>
#include <vector>

#include "flowmc/common.hpp"
#include "flowmc/electrical.hpp"
#include "flowmc/graph.hpp"
#include "flowmc/spectral.hpp"

namespace flowmc {

/// M*_{ij} = row_effects_i + col_effects_j.
struct AdditiveModel {
    Vector row_effects;
    Vector col_effects;

    Matrix matrix() const;
};

/// Alternating sum of observations along a path: entries reached from a row
/// vertex are added, entries reached from a column vertex are subtracted.
double path_estimate_additive(const BipartiteGraph& graph, const Path& path, const Matrix& data);

/// <flow, vec_omega(data)>. Throws InvalidFlow if `flow` is not a unit flow
/// between its recorded endpoints.
double unit_flow_estimate(const UnitFlow& flow, const BipartiteGraph& graph, const Matrix& data);

/// Electrical flow estimate of one entry. Throws DisconnectedPair.
double efe_entry(const BipartiteGraph& graph, const SpectralCore& core, const Matrix& data, int i,
                 int j);

/// Minimum-norm least-squares factors.
struct LseFactors {
    Vector row;
    Vector col;
};

/// Closed-form least-squares factors from the blocks of L^+ and the observed
/// row and column sums. Unobserved cells of `data` are ignored.
LseFactors lse_factors(const BipartiteGraph& graph, const SpectralCore& core, const Matrix& data);
LseFactors lse_factors(const ObservationMask& mask, const Matrix& data);

struct EstimateReport {
    EstimateGrid estimates;                     // nullopt marks an unidentifiable entry
    ResistanceGrid resistance;
    std::optional<EstimateGrid> variance_bound;   // sigma^2 R, when sigma is given
    std::optional<EstimateGrid> high_prob_bound;  // 2 sigma^2 R log(2nm/delta), when sigma and delta are given

    bool identifiable(int i, int j) const { return estimates(i, j).has_value(); }
};

/// Reusable electrical flow estimator for a fixed observation pattern. The
/// per-component pseudoinverse blocks are computed once; estimate() then runs
/// the row-sum / column-sum step for each component.
class ElectricalFlowEstimator {
public:
    explicit ElectricalFlowEstimator(const ObservationMask& mask,
                                     double rank_tolerance = kDefaultRankTolerance);

    const ObservationMask& mask() const { return mask_; }
    const ComponentLabeling& components() const { return components_; }

    /// Estimates for every entry; nullopt across components.
    EstimateGrid estimate(const Matrix& data) const;

    /// Same as estimate() but as a dense matrix with NaN for unidentifiable cells.
    Matrix estimate_dense(const Matrix& data) const;

    /// Effective resistance of every pair, from the per-component blocks.
    ResistanceGrid resistances() const;

private:
    struct Component {
        std::vector<int> rows;
        std::vector<int> cols;
        Matrix signed_pinv;  // [[G11, -G12], [-G21, G22]]
    };

    void fill(const Matrix& data, Matrix& out) const;

    ObservationMask mask_;
    ComponentLabeling components_;
    std::vector<Component> parts_;
};

/// Electrical flow estimates for the whole matrix with optional certificates.
EstimateReport efe_full(const ObservationMask& mask, const Matrix& data,
                        std::optional<double> sigma = std::nullopt,
                        std::optional<double> delta = std::nullopt);

/// Largest |efe_entry - (a_i + b_j)| over connected pairs.
double equivalence_gap(const ObservationMask& mask, const Matrix& data);

/// True iff the electrical flow and least-squares estimates agree within tol
/// on every connected pair.
bool verify_equivalence(const ObservationMask& mask, const Matrix& data, double tol = 1e-8);

/// Alternative additive model shifted along the (i,j) voltage vector by
/// epsilon: row k moves by +epsilon v_k, column l by -epsilon v_{n+l}.
/// Throws DisconnectedPair and InvalidArgument (epsilon outside (0,1)).
AdditiveModel hard_instance_additive(const AdditiveModel& base, const BipartiteGraph& graph,
                                     const SpectralCore& core, int i, int j, double epsilon);

/// Sum over observed cells of (a - b)^2.
double observed_squared_difference(const ObservationMask& mask, const Matrix& a, const Matrix& b);

/// Residual variance estimate with n_e - (n + m - components) degrees of
/// freedom; nullopt when there are no residual degrees of freedom. This is a
/// convenience: sigma is otherwise always supplied by the caller.
std::optional<double> estimate_noise_variance(const ObservationMask& mask, const Matrix& data);

}  // namespace flowmc
