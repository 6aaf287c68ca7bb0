#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowmc/common.hpp"
#include "flowmc/graph.hpp"

namespace flowmc {

enum class PatternKind { staircase, staggered_exposure, uniform_bernoulli, extreme_sparsity, dense_submatrix };
enum class ModelKind { additive, rank1, panel };

std::string to_string(PatternKind kind);
std::string to_string(ModelKind kind);
PatternKind parse_pattern_kind(const std::string& name);
ModelKind parse_model_kind(const std::string& name);

struct SimConfig {
    PatternKind pattern = PatternKind::staircase;
    ModelKind model = ModelKind::panel;
    int rows = 30;
    int cols = 30;

    // staggered_exposure
    int groups = 4;
    bool wrap_around = false;
    // uniform_bernoulli
    double probability = 0.5;
    // staircase: treated band of row block b over column blocks b and b+1,
    // each cell kept with probability base_density * thinning^b.
    int staircase_blocks = 6;
    double base_density = 1.0;
    double thinning = 0.7;
    // dense_submatrix: target (0,0) plus rows 1..block_rows and columns 1..block_cols
    int block_rows = 4;
    int block_cols = 4;

    // rank1 factors are drawn uniformly from [factor_low, factor_high]
    double factor_low = 1.0;
    double factor_high = 1.0;

    double noise_sigma = 0.1;
    int trials = 1000;
    std::uint64_t seed = 1;
    int histogram_bins = 30;
    int threads = 0;  // 0: all available cores

    void validate() const;
};

/// Reads a flat `key = value` config; '#' starts a comment. Unknown keys throw.
SimConfig parse_sim_config(const std::string& text);

struct GeneratedPattern {
    ObservationMask observed;
    std::optional<Grid<char>> treatment;  // panel patterns only
    std::map<std::string, std::string> metadata;
};

GeneratedPattern generate_pattern(const SimConfig& config);

// Individual generators -----------------------------------------------------

/// First row, first column and diagonal, without (0,0).
ObservationMask extreme_sparsity_mask(int n);

/// All cells of ({0} u I) x ({0} u J) except (0,0), I = 1..block_rows, J = 1..block_cols.
ObservationMask dense_submatrix_mask(int rows, int cols, int block_rows, int block_cols);

ObservationMask uniform_bernoulli_mask(int rows, int cols, double p, std::uint64_t seed);

Grid<char> staircase_treatment(int rows, int cols, int blocks, double base_density, double thinning,
                               std::uint64_t seed);

struct HistogramBin {
    double left;
    double right;
    long count;
};

struct SimResult {
    Matrix per_entry_mse;         // NaN where unidentifiable
    Matrix resistance_reference;  // R (additive), R0 + R1 (panel), 1/K (rank1); +inf where unidentifiable
    Matrix ratio;                 // mse / reference, NaN where unidentifiable
    std::vector<HistogramBin> histogram;
    int identifiable = 0;
    double grand_mean_ratio = 0.0;
    double ratio_standard_error = 0.0;  // across-trial standard error of the grand mean
    double spearman = 0.0;              // MSE heatmap vs reference heatmap
    long degenerate = 0;                // rank1 draws with a degenerate denominator
    double seconds = 0.0;
    std::map<std::string, std::string> metadata;
};

SimResult run_experiment(const SimConfig& config);

/// Writes mse.csv, resistance.csv, ratio.csv (N x T, `inf` for unidentifiable),
/// histogram.csv (bin_left,bin_right,count) and metadata.txt into `directory`.
void export_result(const SimResult& result, const std::string& directory);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

/// Deterministic per-substream generator: stream `index` of `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

/// Worker count from an explicit request, FLOWMC_THREADS, or the hardware.
int resolve_threads(int requested);

}  // namespace flowmc
