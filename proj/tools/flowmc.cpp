#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "flowmc/additive.hpp"
#include "flowmc/electrical.hpp"
#include "flowmc/io.hpp"
#include "flowmc/maxflow.hpp"
#include "flowmc/panel.hpp"
#include "flowmc/rank1.hpp"
#include "flowmc/sim.hpp"

#ifndef FLOWMC_VERSION
#define FLOWMC_VERSION "0.0.0"
#endif
#ifndef FLOWMC_GIT_HASH
#define FLOWMC_GIT_HASH "unknown"
#endif
#ifndef FLOWMC_BUILD_DATE
#define FLOWMC_BUILD_DATE "unknown"
#endif

using namespace flowmc;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kImpossible = 2;

struct DataInput {
    std::string data;
    std::string mask;
    bool mask_from_data = false;
    std::optional<double> sigma;
    std::optional<double> delta;
    std::string out;
};

void add_data_options(CLI::App* cmd, DataInput& in) {
    cmd->add_option("--data", in.data, "Data matrix CSV (no header; empty or NaN cells are unobserved)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--mask", in.mask, "Observation mask CSV with header row,col (1-based)")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--mask-from-data", in.mask_from_data, "Treat every non-empty data cell as observed");
    cmd->add_option("--sigma", in.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    cmd->add_option("--delta", in.delta, "Failure probability for the high-probability bound")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--out", in.out, "Output file (stdout when omitted)");
}

ObservationMask load_mask(const std::string& path, std::optional<int> rows, std::optional<int> cols) {
    int duplicates = 0;
    auto mask = io::read_mask_file(path, rows, cols, &duplicates);
    if (duplicates > 0)
        std::cerr << "warning: " << duplicates << " duplicate (row,col) pair(s) in " << path << " collapsed\n";
    return mask;
}

std::pair<Matrix, ObservationMask> load_data(const DataInput& in) {
    Matrix data = io::read_matrix_file(in.data);
    const int n = static_cast<int>(data.rows());
    const int m = static_cast<int>(data.cols());
    if (in.mask.empty() == !in.mask_from_data)
        throw InvalidArgument("give exactly one of --mask and --mask-from-data");
    const ObservationMask mask = in.mask_from_data ? io::mask_from_data(data) : load_mask(in.mask, n, m);
    for (const auto& [i, j] : mask.entries())
        if (std::isnan(data(i, j)))
            throw InvalidArgument("observed cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                  ") has no value");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (!mask.observed(i, j)) data(i, j) = 0.0;
    return {data, mask};
}

void check_sigma_delta(const DataInput& in) {
    if (in.sigma.has_value() != in.delta.has_value()) throw InvalidArgument("--sigma and --delta go together");
}

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write(out);
}

void emit_json(const std::string& path, const io::Json& j) {
    emit(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

// "i,j" with 1-based indices.
Entry parse_pair(const std::string& text, int n, int m) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw InvalidArgument("pair must look like i,j");
    int i = 0, j = 0;
    try {
        i = std::stoi(text.substr(0, comma));
        j = std::stoi(text.substr(comma + 1));
    } catch (const std::exception&) {
        throw InvalidArgument("pair must look like i,j");
    }
    if (i < 1 || i > n || j < 1 || j > m) throw InvalidArgument("pair " + text + " is outside the matrix");
    return {i - 1, j - 1};
}

bool any_identifiable(const EstimateGrid& g) {
    for (const auto& c : g.cells())
        if (c) return true;
    return false;
}

int run_additive(const DataInput& in) {
    check_sigma_delta(in);
    const auto [data, mask] = load_data(in);
    const auto report = efe_full(mask, data, in.sigma, in.delta);
    emit_json(in.out, io::additive_report_json(report));
    return any_identifiable(report.estimates) ? kOk : kImpossible;
}

int run_rank1(const DataInput& in, double bound_constant) {
    check_sigma_delta(in);
    const auto [data, mask] = load_data(in);
    const auto report = rank1_full(mask, data);
    auto j = io::rank1_report_json(report);
    if (in.sigma) {
        double m_inf = 0.0;
        for (const auto& [r, c] : mask.entries()) m_inf = std::max(m_inf, std::abs(data(r, c)));
        io::Json bounds = io::Json::array();
        for (int r = 0; r < mask.n_rows(); ++r) {
            io::Json row = io::Json::array();
            for (int c = 0; c < mask.n_cols(); ++c) {
                if (report.k(r, c) == 0) {
                    row.push_back(nullptr);
                    continue;
                }
                row.push_back(rank1_error_bound(report.k(r, c), report.max_len(r, c), *in.sigma, m_inf,
                                                mask.n_rows(), mask.n_cols(), *in.delta, bound_constant));
            }
            bounds.push_back(std::move(row));
        }
        j["error_bound"] = std::move(bounds);
        j["bound_constant"] = bound_constant;
    }
    emit_json(in.out, j);
    return any_identifiable(report.estimates) ? kOk : kImpossible;
}

struct MaskInput {
    std::string mask;
    std::optional<int> rows;
    std::optional<int> cols;
};

void add_mask_options(CLI::App* cmd, MaskInput& in) {
    cmd->add_option("--mask", in.mask, "Observation mask CSV with header row,col (1-based)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--rows", in.rows, "Row count (default: largest row index)")->check(CLI::PositiveNumber);
    cmd->add_option("--cols", in.cols, "Column count (default: largest column index)")->check(CLI::PositiveNumber);
}

int run_resistance(const MaskInput& in, const std::string& pair, bool all, const std::string& out) {
    if (pair.empty() == !all) throw InvalidArgument("give exactly one of --pair and --all");
    const auto mask = load_mask(in.mask, in.rows, in.cols);
    const SpectralCore core(build_graph(mask));
    std::vector<Entry> pairs;
    if (all) {
        for (int i = 0; i < mask.n_rows(); ++i)
            for (int j = 0; j < mask.n_cols(); ++j) pairs.push_back({i, j});
    } else {
        pairs.push_back(parse_pair(pair, mask.n_rows(), mask.n_cols()));
    }
    const auto r = all_resistances(core);
    emit(out, [&](std::ostream& os) { io::write_resistance_csv(os, pairs, r); });
    return kOk;
}

int run_paths(const MaskInput& in, const std::string& pair, const std::string& out) {
    const auto mask = load_mask(in.mask, in.rows, in.cols);
    const auto g = build_graph(mask);
    const auto [i, j] = parse_pair(pair, mask.n_rows(), mask.n_cols());
    const auto result = disjoint_paths_and_cut(g, i, j);
    emit_json(out, io::path_set_json(g, result));
    return result.path_set.k > 0 ? kOk : kImpossible;
}

// Accepts either a row,col mask file or a 0/1 grid.
ObservationMask load_observed(const std::string& path, int n, int t) {
    std::ifstream in(path);
    std::string first;
    while (std::getline(in, first))
        if (first.find_first_not_of(" \t\r") != std::string::npos) break;
    if (first.rfind("row,col", 0) == 0) return load_mask(path, n, t);
    const auto grid = io::read_binary_file(path);
    if (grid.rows() != n || grid.cols() != t) throw DimensionMismatch("observed grid and outcomes differ in shape");
    std::vector<Entry> cells;
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < t; ++s)
            if (grid(i, s)) cells.push_back({i, s});
    return ObservationMask::from_entries(n, t, cells);
}

struct PanelInput {
    std::string outcomes;
    std::string treatment;
    std::string observed;
    std::optional<double> sigma;
    std::optional<double> delta;
    double bound_constant = kPanelBoundConstant;
    bool did = false;
    std::string out;
};

int run_panel(const PanelInput& in) {
    if (in.sigma.has_value() != in.delta.has_value()) throw InvalidArgument("--sigma and --delta go together");
    Matrix y = io::read_matrix_file(in.outcomes);
    const auto x = io::read_binary_file(in.treatment);
    const int n = static_cast<int>(y.rows());
    const int t = static_cast<int>(y.cols());
    if (x.rows() != n || x.cols() != t) throw DimensionMismatch("treatment and outcomes differ in shape");
    const auto observed = in.observed.empty() ? io::mask_from_data(y) : load_observed(in.observed, n, t);
    for (const auto& [i, s] : observed.entries())
        if (std::isnan(y(i, s)))
            throw InvalidArgument("observed cell (" + std::to_string(i + 1) + "," + std::to_string(s + 1) +
                                  ") has no outcome");
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < t; ++s)
            if (!observed.observed(i, s)) y(i, s) = 0.0;
    const PanelData panel{y, x, observed};
    const auto report = estimate_effects(panel, in.sigma, in.delta, in.bound_constant);
    std::optional<EstimateGrid> did;
    if (in.did) {
        did = EstimateGrid(n, t, std::nullopt);
        for (const auto& [i, s] : observed.entries())
            if (x(i, s)) (*did)(i, s) = did_estimate(panel, i, s);
    }
    emit_json(in.out, io::causal_report_json(report, did));
    return any_identifiable(report.beta_hat) ? kOk : kImpossible;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, std::optional<int> trials,
                 std::optional<std::uint64_t> seed, int threads) {
    auto cfg = parse_sim_config(io::read_text_file(config_path));
    if (trials) cfg.trials = *trials;
    if (seed) cfg.seed = *seed;
    if (threads > 0) cfg.threads = threads;
    cfg.validate();
    const auto result = run_experiment(cfg);
    export_result(result, out_dir);
    std::printf("identifiable entries: %d\n", result.identifiable);
    std::printf("grand mean ratio: %s (standard error %s)\n", io::format_double(result.grand_mean_ratio).c_str(),
                io::format_double(result.ratio_standard_error).c_str());
    std::printf("spearman: %s\n", io::format_double(result.spearman).c_str());
    if (cfg.model == ModelKind::rank1) std::printf("degenerate denominators: %ld\n", result.degenerate);
    std::printf("runtime: %.2f s\n", result.seconds);
    std::printf("outputs written to %s\n", out_dir.c_str());
    return result.identifiable > 0 ? kOk : kImpossible;
}

int run_generate(SimConfig cfg, const std::string& out_dir) {
    const auto pattern = generate_pattern(cfg);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "mask.csv");
        io::write_mask_csv(out, pattern.observed);
    }
    if (pattern.treatment) {
        std::ofstream out(fs::path(out_dir) / "treatment.csv");
        io::write_binary_grid(out, *pattern.treatment);
    }
    std::ofstream meta(fs::path(out_dir) / "pattern.txt");
    for (const auto& [k, v] : pattern.metadata) meta << k << " = " << v << '\n';
    std::printf("pattern written to %s\n", out_dir.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entry-wise matrix estimation from arbitrary observation patterns"};
    app.set_version_flag("--version", std::string("flowmc ") + FLOWMC_VERSION + " (" + FLOWMC_GIT_HASH + ", built " +
                                          FLOWMC_BUILD_DATE + ")");
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: FLOWMC_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    DataInput additive;
    auto* cmd_add = app.add_subcommand("estimate-additive", "Electrical flow estimates for an additive matrix");
    add_data_options(cmd_add, additive);

    DataInput rank1;
    double rank1_constant = 1.0;
    auto* cmd_r1 = app.add_subcommand("estimate-rank1", "Disjoint-path estimates for a rank-one matrix");
    add_data_options(cmd_r1, rank1);
    cmd_r1->add_option("--bound-constant", rank1_constant, "Multiplier of the error bound")
        ->check(CLI::PositiveNumber);

    MaskInput res_mask;
    std::string res_pair, res_out;
    bool res_all = false;
    auto* cmd_res = app.add_subcommand("resistance", "Effective resistances of row/column pairs");
    add_mask_options(cmd_res, res_mask);
    cmd_res->add_option("--pair", res_pair, "Target i,j (1-based)");
    cmd_res->add_flag("--all", res_all, "Every pair");
    cmd_res->add_option("--out", res_out, "Output CSV (stdout when omitted)");

    MaskInput path_mask;
    std::string path_pair, path_out;
    auto* cmd_paths = app.add_subcommand("paths", "Edge-disjoint paths and minimum cut for one entry");
    add_mask_options(cmd_paths, path_mask);
    cmd_paths->add_option("--pair", path_pair, "Target i,j (1-based)")->required();
    cmd_paths->add_option("--out", path_out, "Output JSON (stdout when omitted)");

    PanelInput panel;
    auto* cmd_panel = app.add_subcommand("panel", "Heterogeneous treatment effects from panel data");
    cmd_panel->add_option("--outcomes", panel.outcomes, "Outcome CSV (N x T)")->required()->check(CLI::ExistingFile);
    cmd_panel->add_option("--treatment", panel.treatment, "0/1 treatment CSV (N x T)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_panel->add_option("--observed", panel.observed, "Observed cells: row,col mask or 0/1 grid")
        ->check(CLI::ExistingFile);
    cmd_panel->add_option("--sigma", panel.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    cmd_panel->add_option("--delta", panel.delta, "Failure probability")->check(CLI::Range(0.0, 1.0));
    cmd_panel->add_option("--bound-constant", panel.bound_constant, "Multiplier of the error bound")
        ->check(CLI::PositiveNumber);
    cmd_panel->add_flag("--did", panel.did, "Also report difference-in-differences estimates");
    cmd_panel->add_option("--out", panel.out, "Output JSON (stdout when omitted)");

    std::string sim_config, sim_out = "sim_out";
    std::optional<int> sim_trials;
    std::optional<std::uint64_t> sim_seed;
    auto* cmd_sim = app.add_subcommand("simulate", "Monte-Carlo experiment from a key = value config");
    cmd_sim->add_option("--config", sim_config, "Config file")->required()->check(CLI::ExistingFile);
    cmd_sim->add_option("--out-dir", sim_out, "Output directory");
    cmd_sim->add_option("--trials", sim_trials, "Override the trial count")->check(CLI::PositiveNumber);
    cmd_sim->add_option("--seed", sim_seed, "Override the seed");

    SimConfig gen;
    std::string gen_pattern = "staircase", gen_config, gen_out = "pattern_out";
    auto* cmd_gen = app.add_subcommand("generate-pattern", "Write an observation / treatment pattern");
    cmd_gen->add_option("--config", gen_config, "Config file (other options override it)")
        ->check(CLI::ExistingFile);
    auto* gen_pattern_opt = cmd_gen->add_option("--pattern", gen_pattern,
                                                "staircase | staggered_exposure | uniform_bernoulli | "
                                                "extreme_sparsity | dense_submatrix");
    auto* gen_rows = cmd_gen->add_option("--rows", gen.rows, "Rows");
    auto* gen_cols = cmd_gen->add_option("--cols", gen.cols, "Columns");
    auto* gen_groups = cmd_gen->add_option("--groups", gen.groups, "Staggered exposure groups");
    auto* gen_wrap = cmd_gen->add_flag("--wrap-around", gen.wrap_around, "Cyclic staggered exposure");
    auto* gen_p = cmd_gen->add_option("--probability", gen.probability, "Bernoulli probability");
    auto* gen_blocks = cmd_gen->add_option("--staircase-blocks", gen.staircase_blocks, "Staircase blocks");
    auto* gen_thin = cmd_gen->add_option("--thinning", gen.thinning, "Staircase thinning per block");
    auto* gen_br = cmd_gen->add_option("--block-rows", gen.block_rows, "Dense block rows");
    auto* gen_bc = cmd_gen->add_option("--block-cols", gen.block_cols, "Dense block columns");
    auto* gen_seed = cmd_gen->add_option("--seed", gen.seed, "Seed");
    cmd_gen->add_option("--out-dir", gen_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (threads > 0) setenv("FLOWMC_THREADS", std::to_string(threads).c_str(), 1);
        if (*cmd_add) return run_additive(additive);
        if (*cmd_r1) return run_rank1(rank1, rank1_constant);
        if (*cmd_res) return run_resistance(res_mask, res_pair, res_all, res_out);
        if (*cmd_paths) return run_paths(path_mask, path_pair, path_out);
        if (*cmd_panel) return run_panel(panel);
        if (*cmd_sim) return run_simulate(sim_config, sim_out, sim_trials, sim_seed, threads);
        if (*cmd_gen) {
            SimConfig cfg = gen_config.empty() ? SimConfig{} : parse_sim_config(io::read_text_file(gen_config));
            if (gen_config.empty() || gen_pattern_opt->count()) cfg.pattern = parse_pattern_kind(gen_pattern);
            if (gen_rows->count()) cfg.rows = gen.rows;
            if (gen_cols->count()) cfg.cols = gen.cols;
            if (gen_groups->count()) cfg.groups = gen.groups;
            if (gen_wrap->count()) cfg.wrap_around = gen.wrap_around;
            if (gen_p->count()) cfg.probability = gen.probability;
            if (gen_blocks->count()) cfg.staircase_blocks = gen.staircase_blocks;
            if (gen_thin->count()) cfg.thinning = gen.thinning;
            if (gen_br->count()) cfg.block_rows = gen.block_rows;
            if (gen_bc->count()) cfg.block_cols = gen.block_cols;
            if (gen_seed->count()) cfg.seed = gen.seed;
            // the panel model only applies to treatment patterns; generation ignores the model
            if (cfg.pattern != PatternKind::staircase && cfg.pattern != PatternKind::staggered_exposure)
                cfg.model = ModelKind::additive;
            return run_generate(cfg, gen_out);
        }
    } catch (const DisconnectedPair& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kImpossible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kInvalid;
}
