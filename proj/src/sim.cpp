#include "flowmc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "flowmc/additive.hpp"
#include "flowmc/io.hpp"
#include "flowmc/panel.hpp"
#include "flowmc/rank1.hpp"

namespace flowmc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream index reserved for model parameters; trials use 0..trials-1.
constexpr std::uint64_t kModelStream = ~std::uint64_t{0};
constexpr std::uint64_t kPatternStream = ~std::uint64_t{0} - 1;
constexpr int kChunk = 64;

bool panel_pattern(PatternKind p) {
    return p == PatternKind::staircase || p == PatternKind::staggered_exposure;
}

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    T out{};
    ss >> out;
    if (ss.fail() || !ss.eof()) throw InvalidArgument("bad value '" + value + "' for " + key);
    return out;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t a = 0; a < order.size();) {
        std::size_t b = a;
        while (b + 1 < order.size() && v[order[b + 1]] == v[order[a]]) ++b;
        const double r = 0.5 * static_cast<double>(a + b) + 1.0;
        for (std::size_t k = a; k <= b; ++k) rank[order[k]] = r;
        a = b + 1;
    }
    return rank;
}

// Squared errors of one trial; NaN where the estimator gives nothing.
struct TrialOutput {
    Matrix sq_error;
    long degenerate = 0;
};

}  // namespace

std::string to_string(PatternKind kind) {
    switch (kind) {
        case PatternKind::staircase: return "staircase";
        case PatternKind::staggered_exposure: return "staggered_exposure";
        case PatternKind::uniform_bernoulli: return "uniform_bernoulli";
        case PatternKind::extreme_sparsity: return "extreme_sparsity";
        case PatternKind::dense_submatrix: return "dense_submatrix";
    }
    return "unknown";
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::additive: return "additive";
        case ModelKind::rank1: return "rank1";
        case ModelKind::panel: return "panel";
    }
    return "unknown";
}

PatternKind parse_pattern_kind(const std::string& name) {
    for (auto k : {PatternKind::staircase, PatternKind::staggered_exposure, PatternKind::uniform_bernoulli,
                   PatternKind::extreme_sparsity, PatternKind::dense_submatrix})
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown pattern '" + name + "'");
}

ModelKind parse_model_kind(const std::string& name) {
    for (auto k : {ModelKind::additive, ModelKind::rank1, ModelKind::panel})
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown model '" + name + "'");
}

void SimConfig::validate() const {
    if (rows <= 0 || cols <= 0) throw InvalidArgument("rows and cols must be positive");
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    if (noise_sigma < 0.0) throw InvalidArgument("noise_sigma must be non-negative");
    if (histogram_bins < 1) throw InvalidArgument("histogram_bins must be positive");
    if (model == ModelKind::panel && !panel_pattern(pattern))
        throw InvalidArgument("panel model needs a treatment pattern (staircase or staggered_exposure)");
    switch (pattern) {
        case PatternKind::staggered_exposure:
            if (rows != cols) throw InvalidArgument("staggered_exposure needs rows == cols");
            if (groups <= 0 || rows % groups != 0) throw InvalidArgument("groups must divide rows");
            break;
        case PatternKind::uniform_bernoulli:
            if (probability < 0.0 || probability > 1.0) throw InvalidArgument("probability must lie in [0,1]");
            break;
        case PatternKind::staircase:
            if (staircase_blocks < 1 || staircase_blocks > std::min(rows, cols))
                throw InvalidArgument("staircase_blocks out of range");
            if (base_density < 0.0 || base_density > 1.0 || thinning < 0.0 || thinning > 1.0)
                throw InvalidArgument("base_density and thinning must lie in [0,1]");
            break;
        case PatternKind::extreme_sparsity:
            if (rows != cols || rows < 2) throw InvalidArgument("extreme_sparsity needs square n >= 2");
            break;
        case PatternKind::dense_submatrix:
            if (block_rows < 1 || block_cols < 1 || block_rows >= rows || block_cols >= cols)
                throw InvalidArgument("dense_submatrix block does not fit");
            break;
    }
    if (factor_low > factor_high) throw InvalidArgument("factor_low exceeds factor_high");
}

SimConfig parse_sim_config(const std::string& text) {
    SimConfig c;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        if (strip(line).empty()) continue;
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key == "pattern") c.pattern = parse_pattern_kind(value);
        else if (key == "model") c.model = parse_model_kind(value);
        else if (key == "rows") c.rows = parse_value<int>(key, value);
        else if (key == "cols") c.cols = parse_value<int>(key, value);
        else if (key == "groups") c.groups = parse_value<int>(key, value);
        else if (key == "wrap_around") c.wrap_around = value == "true" || value == "1";
        else if (key == "probability") c.probability = parse_value<double>(key, value);
        else if (key == "staircase_blocks") c.staircase_blocks = parse_value<int>(key, value);
        else if (key == "base_density") c.base_density = parse_value<double>(key, value);
        else if (key == "thinning") c.thinning = parse_value<double>(key, value);
        else if (key == "block_rows") c.block_rows = parse_value<int>(key, value);
        else if (key == "block_cols") c.block_cols = parse_value<int>(key, value);
        else if (key == "factor_low") c.factor_low = parse_value<double>(key, value);
        else if (key == "factor_high") c.factor_high = parse_value<double>(key, value);
        else if (key == "noise_sigma") c.noise_sigma = parse_value<double>(key, value);
        else if (key == "trials") c.trials = parse_value<int>(key, value);
        else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
        else if (key == "histogram_bins") c.histogram_bins = parse_value<int>(key, value);
        else if (key == "threads") c.threads = parse_value<int>(key, value);
        else throw InvalidArgument("unknown config key '" + key + "'");
    }
    c.validate();
    return c;
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)), static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                      static_cast<std::uint32_t>(splitmix64(index ^ 0x5851f42d4c957f2dULL)),
                      static_cast<std::uint32_t>(splitmix64(index ^ 0x5851f42d4c957f2dULL) >> 32)};
    return std::mt19937_64(seq);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FLOWMC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ObservationMask extreme_sparsity_mask(int n) {
    if (n < 2) throw InvalidArgument("extreme sparsity needs n >= 2");
    std::vector<Entry> e;
    for (int k = 1; k < n; ++k) {
        e.push_back({0, k});
        e.push_back({k, 0});
        e.push_back({k, k});
    }
    return ObservationMask::from_entries(n, n, e);
}

ObservationMask dense_submatrix_mask(int rows, int cols, int block_rows, int block_cols) {
    if (block_rows < 1 || block_cols < 1 || block_rows >= rows || block_cols >= cols)
        throw InvalidArgument("dense submatrix block does not fit");
    std::vector<Entry> e;
    for (int i = 0; i <= block_rows; ++i)
        for (int j = 0; j <= block_cols; ++j)
            if (i != 0 || j != 0) e.push_back({i, j});
    return ObservationMask::from_entries(rows, cols, e);
}

ObservationMask uniform_bernoulli_mask(int rows, int cols, double p, std::uint64_t seed) {
    auto rng = substream(seed, kPatternStream);
    std::bernoulli_distribution keep(p);
    std::vector<Entry> e;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (keep(rng)) e.push_back({i, j});
    return ObservationMask::from_entries(rows, cols, e);
}

Grid<char> staircase_treatment(int rows, int cols, int blocks, double base_density, double thinning,
                               std::uint64_t seed) {
    if (blocks < 1 || blocks > std::min(rows, cols)) throw InvalidArgument("staircase_blocks out of range");
    auto rng = substream(seed, kPatternStream);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int row_block = rows / blocks;
    const int col_block = cols / blocks;
    Grid<char> x(rows, cols, 0);
    for (int i = 0; i < rows; ++i) {
        const int b = std::min(i / row_block, blocks - 1);
        const double keep = base_density * std::pow(thinning, b);
        for (int t = 0; t < cols; ++t) {
            const int c = std::min(t / col_block, blocks - 1);
            const double u = unif(rng);  // drawn for every cell so the stream layout is fixed
            if ((c == b || c == b + 1) && u < keep) x(i, t) = 1;
        }
    }
    return x;
}

GeneratedPattern generate_pattern(const SimConfig& config) {
    config.validate();
    GeneratedPattern out{ObservationMask::full(config.rows, config.cols), std::nullopt, {}};
    auto& meta = out.metadata;
    meta["pattern"] = to_string(config.pattern);
    meta["rows"] = std::to_string(config.rows);
    meta["cols"] = std::to_string(config.cols);
    switch (config.pattern) {
        case PatternKind::staircase:
            out.treatment = staircase_treatment(config.rows, config.cols, config.staircase_blocks,
                                                config.base_density, config.thinning, config.seed);
            meta["staircase_blocks"] = std::to_string(config.staircase_blocks);
            meta["base_density"] = io::format_double(config.base_density);
            meta["thinning"] = io::format_double(config.thinning);
            meta["staircase_geometry"] =
                "row block b treated over column blocks b and b+1, cells kept w.p. base_density*thinning^b "
                "(parametric interpretation of a pictorial pattern)";
            break;
        case PatternKind::staggered_exposure:
            out.treatment = staggered_exposure_treatment(config.rows, config.groups, config.wrap_around);
            meta["groups"] = std::to_string(config.groups);
            meta["wrap_around"] = config.wrap_around ? "true" : "false";
            break;
        case PatternKind::uniform_bernoulli:
            out.observed = uniform_bernoulli_mask(config.rows, config.cols, config.probability, config.seed);
            meta["probability"] = io::format_double(config.probability);
            break;
        case PatternKind::extreme_sparsity:
            out.observed = extreme_sparsity_mask(config.rows);
            break;
        case PatternKind::dense_submatrix:
            out.observed = dense_submatrix_mask(config.rows, config.cols, config.block_rows, config.block_cols);
            meta["block_rows"] = std::to_string(config.block_rows);
            meta["block_cols"] = std::to_string(config.block_cols);
            break;
    }
    return out;
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman needs two equal samples of size >= 2");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        sxy += (rx[k] - mx) * (ry[k] - my);
        sxx += (rx[k] - mx) * (rx[k] - mx);
        syy += (ry[k] - my) * (ry[k] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

SimResult run_experiment(const SimConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto pattern = generate_pattern(config);
    const int n = config.rows;
    const int m = config.cols;
    const double sigma = config.noise_sigma;
    const double inf = std::numeric_limits<double>::infinity();

    SimResult result;
    result.metadata = pattern.metadata;
    result.metadata["model"] = to_string(config.model);
    result.metadata["noise_sigma"] = io::format_double(sigma);
    result.metadata["trials"] = std::to_string(config.trials);
    result.metadata["seed"] = std::to_string(config.seed);

    // Signal and reference, fixed across trials.
    auto model_rng = substream(config.seed, kModelStream);
    std::normal_distribution<double> std_normal(0.0, 1.0);
    Matrix truth = Matrix::Zero(n, m);   // target of estimation
    Matrix signal = Matrix::Zero(n, m);  // noiseless observation
    Matrix reference = Matrix::Constant(n, m, inf);

    std::optional<ElectricalFlowEstimator> efe, control_efe, treated_efe;
    std::optional<PathEstimator> paths;

    switch (config.model) {
        case ModelKind::additive: {
            Vector a(n), b(m);
            for (auto& v : a) v = std_normal(model_rng);
            for (auto& v : b) v = std_normal(model_rng);
            truth = AdditiveModel{a, b}.matrix();
            signal = truth;
            efe.emplace(pattern.observed);
            const auto r = efe->resistances();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) reference(i, j) = r(i, j).as_double();
            result.metadata["reference"] = "effective_resistance";
            break;
        }
        case ModelKind::rank1: {
            std::uniform_real_distribution<double> factor(config.factor_low, config.factor_high);
            Vector a(n), b(m);
            for (auto& v : a) v = config.factor_low == config.factor_high ? config.factor_low : factor(model_rng);
            for (auto& v : b) v = config.factor_low == config.factor_high ? config.factor_low : factor(model_rng);
            truth = RankOneModel{a, b}.matrix();
            signal = truth;
            paths.emplace(pattern.observed);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j)
                    if (paths->paths(i, j).k > 0) reference(i, j) = 1.0 / paths->paths(i, j).k;
            result.metadata["reference"] = "inverse_disjoint_path_count";
            break;
        }
        case ModelKind::panel: {
            Vector alpha(n), gamma(m), a(n), b(m);
            for (auto& v : alpha) v = std_normal(model_rng);
            for (auto& v : gamma) v = std_normal(model_rng);
            for (auto& v : a) v = std_normal(model_rng);
            for (auto& v : b) v = std_normal(model_rng);
            const Matrix control = AdditiveModel{alpha, gamma}.matrix();
            truth = AdditiveModel{a, b}.matrix();  // beta_it
            signal = control;
            for (int i = 0; i < n; ++i)
                for (int t = 0; t < m; ++t)
                    if ((*pattern.treatment)(i, t)) signal(i, t) += truth(i, t);
            const PanelData panel{signal, *pattern.treatment, pattern.observed};
            const auto [c_mask, t_mask] = split_masks(panel);
            control_efe.emplace(c_mask);
            treated_efe.emplace(t_mask);
            const auto r0 = control_efe->resistances();
            const auto r1 = treated_efe->resistances();
            for (int i = 0; i < n; ++i)
                for (int t = 0; t < m; ++t) reference(i, t) = (r0(i, t) + r1(i, t)).as_double();
            result.metadata["reference"] = "control_plus_treatment_resistance";
            break;
        }
    }

    auto run_trial = [&](int trial) {
        auto rng = substream(config.seed, static_cast<std::uint64_t>(trial));
        std::normal_distribution<double> noise(0.0, 1.0);
        Matrix y = signal;
        // Noise is drawn for every cell in row-major order, observed or not.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) y(i, j) += sigma * noise(rng);

        TrialOutput out{Matrix::Constant(n, m, std::numeric_limits<double>::quiet_NaN()), 0};
        switch (config.model) {
            case ModelKind::additive:
                out.sq_error = (efe->estimate_dense(y) - truth).array().square().matrix();
                break;
            case ModelKind::panel: {
                const Matrix beta = treated_efe->estimate_dense(y) - control_efe->estimate_dense(y);
                out.sq_error = (beta - truth).array().square().matrix();
                break;
            }
            case ModelKind::rank1:
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < m; ++j) {
                        const auto e = paths->estimate_entry(y, i, j);
                        if (e.status == Rank1Status::ok)
                            out.sq_error(i, j) = std::pow(e.value - truth(i, j), 2);
                        else if (e.status == Rank1Status::degenerate_denominator)
                            ++out.degenerate;
                    }
                }
                break;
        }
        return out;
    };

    // Fixed chunking keeps the reduction order independent of the thread count.
    const int chunks = (config.trials + kChunk - 1) / kChunk;
    std::vector<Matrix> chunk_sum(chunks, Matrix::Zero(n, m));
    std::vector<Eigen::MatrixXi> chunk_count(chunks, Eigen::MatrixXi::Zero(n, m));
    std::vector<long> chunk_degenerate(chunks, 0);
    std::vector<Matrix> trial_errors(config.trials);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < chunks; c = next++) {
            for (int trial = c * kChunk; trial < std::min(config.trials, (c + 1) * kChunk); ++trial) {
                auto out = run_trial(trial);
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < m; ++j) {
                        if (std::isnan(out.sq_error(i, j))) continue;
                        chunk_sum[c](i, j) += out.sq_error(i, j);
                        chunk_count[c](i, j) += 1;
                    }
                }
                chunk_degenerate[c] += out.degenerate;
                trial_errors[trial] = std::move(out.sq_error);
            }
        }
    };
    const int workers = std::min(resolve_threads(config.threads), chunks);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    Matrix sum = Matrix::Zero(n, m);
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(n, m);
    for (int c = 0; c < chunks; ++c) {
        sum += chunk_sum[c];
        count += chunk_count[c];
        result.degenerate += chunk_degenerate[c];
    }

    result.per_entry_mse = Matrix::Constant(n, m, std::numeric_limits<double>::quiet_NaN());
    result.ratio = result.per_entry_mse;
    result.resistance_reference = reference;
    std::vector<double> mse_list, ref_list, ratio_list;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            if (std::isinf(reference(i, j)) || count(i, j) == 0) continue;
            result.per_entry_mse(i, j) = sum(i, j) / count(i, j);
            result.ratio(i, j) = result.per_entry_mse(i, j) / reference(i, j);
            mse_list.push_back(result.per_entry_mse(i, j));
            ref_list.push_back(reference(i, j));
            ratio_list.push_back(result.ratio(i, j));
        }
    }
    result.identifiable = static_cast<int>(ratio_list.size());
    if (!ratio_list.empty()) {
        result.grand_mean_ratio =
            std::accumulate(ratio_list.begin(), ratio_list.end(), 0.0) / static_cast<double>(ratio_list.size());

        // Per-trial grand means give an honest standard error under cross-entry correlation.
        std::vector<double> per_trial;
        for (const auto& e : trial_errors) {
            double s = 0.0;
            int k = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j)
                    if (!std::isnan(result.ratio(i, j)) && !std::isnan(e(i, j))) {
                        s += e(i, j) / reference(i, j);
                        ++k;
                    }
            if (k > 0) per_trial.push_back(s / k);
        }
        if (per_trial.size() > 1) {
            const double mean = std::accumulate(per_trial.begin(), per_trial.end(), 0.0) / per_trial.size();
            double var = 0.0;
            for (double v : per_trial) var += (v - mean) * (v - mean);
            var /= static_cast<double>(per_trial.size() - 1);
            result.ratio_standard_error = std::sqrt(var / static_cast<double>(per_trial.size()));
        }
        if (ratio_list.size() >= 2) result.spearman = spearman_correlation(mse_list, ref_list);

        const auto [lo_it, hi_it] = std::minmax_element(ratio_list.begin(), ratio_list.end());
        const double lo = *lo_it;
        const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
        const int bins = config.histogram_bins;
        const double width = (hi - lo) / bins;
        for (int k = 0; k < bins; ++k) result.histogram.push_back({lo + k * width, lo + (k + 1) * width, 0});
        result.histogram.back().right = hi;
        for (double r : ratio_list) {
            int k = static_cast<int>((r - lo) / width);
            result.histogram[std::clamp(k, 0, bins - 1)].count += 1;
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void export_result(const SimResult& result, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(directory) / name);
        if (!out) throw Error("cannot write " + (fs::path(directory) / name).string());
        return out;
    };
    {
        auto out = open("mse.csv");
        io::write_matrix_csv(out, result.per_entry_mse, "inf");
    }
    {
        auto out = open("resistance.csv");
        io::write_matrix_csv(out, result.resistance_reference, "inf");
    }
    {
        auto out = open("ratio.csv");
        io::write_matrix_csv(out, result.ratio, "inf");
    }
    {
        auto out = open("histogram.csv");
        out << "bin_left,bin_right,count\n";
        for (const auto& b : result.histogram)
            out << io::format_double(b.left) << ',' << io::format_double(b.right) << ',' << b.count << '\n';
    }
    {
        auto out = open("metadata.txt");
        for (const auto& [k, v] : result.metadata) out << k << " = " << v << '\n';
        out << "identifiable = " << result.identifiable << '\n';
        out << "grand_mean_ratio = " << io::format_double(result.grand_mean_ratio) << '\n';
        out << "ratio_standard_error = " << io::format_double(result.ratio_standard_error) << '\n';
        out << "spearman = " << io::format_double(result.spearman) << '\n';
        out << "degenerate = " << result.degenerate << '\n';
    }
}

}  // namespace flowmc
