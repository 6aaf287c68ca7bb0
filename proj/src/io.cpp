#include "flowmc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace flowmc::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return in;
}

bool is_nan_text(const std::string& s) {
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower.empty() || lower == "nan" || lower == "na";
}

double parse_number(const std::string& s, int line_no) {
    if (is_nan_text(s)) return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a number");
    }
}

Json optional_grid_json(const EstimateGrid& g) {
    Json rows = Json::array();
    for (int i = 0; i < g.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < g.cols(); ++j) row.push_back(g(i, j) ? Json(*g(i, j)) : Json(nullptr));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json resistance_json(const ResistanceGrid& g) {
    Json rows = Json::array();
    for (int i = 0; i < g.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < g.cols(); ++j)
            row.push_back(g(i, j).is_finite() ? Json(g(i, j).value()) : Json("inf"));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename F>
Json grid_json(int rows, int cols, F&& cell) {
    Json out = Json::array();
    for (int i = 0; i < rows; ++i) {
        Json row = Json::array();
        for (int j = 0; j < cols; ++j) row.push_back(cell(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ObservationMask read_mask_csv(std::istream& in, std::optional<int> rows, std::optional<int> cols,
                              int* duplicates) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<Entry> entries;
    int max_row = 0;
    int max_col = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_commas(line);
        if (!header_seen) {
            header_seen = true;
            if (cells.size() == 2 && cells[0] == "row" && cells[1] == "col") continue;
            throw Error("mask file must start with header 'row,col'");
        }
        if (cells.size() != 2) throw Error("line " + std::to_string(line_no) + ": expected row,col");
        const double r = parse_number(cells[0], line_no);
        const double c = parse_number(cells[1], line_no);
        if (!(r >= 1 && c >= 1) || r != std::floor(r) || c != std::floor(c))
            throw Error("line " + std::to_string(line_no) + ": indices are 1-based integers");
        entries.push_back({static_cast<int>(r) - 1, static_cast<int>(c) - 1});
        max_row = std::max(max_row, static_cast<int>(r));
        max_col = std::max(max_col, static_cast<int>(c));
    }
    if (!header_seen) throw Error("mask file is empty");
    const int n = rows.value_or(max_row);
    const int m = cols.value_or(max_col);
    if (n <= 0 || m <= 0) throw Error("mask dimensions unknown: pass explicit dimensions");
    return ObservationMask::from_entries(n, m, entries, duplicates);
}

ObservationMask read_mask_file(const std::string& path, std::optional<int> rows,
                               std::optional<int> cols, int* duplicates) {
    auto in = open_input(path);
    return read_mask_csv(in, rows, cols, duplicates);
}

void write_mask_csv(std::ostream& out, const ObservationMask& mask) {
    out << "row,col\n";
    for (const auto& [i, j] : mask.entries()) out << i + 1 << ',' << j + 1 << '\n';
}

Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        std::vector<double> row;
        for (const auto& cell : split_commas(line)) row.push_back(parse_number(cell, line_no));
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error("line " + std::to_string(line_no) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) throw Error("matrix file is empty");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Matrix read_matrix_file(const std::string& path) {
    auto in = open_input(path);
    return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::string& nan_text) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << (std::isnan(m(i, j)) ? nan_text : format_double(m(i, j)));
        }
        out << '\n';
    }
}

Grid<char> read_binary_grid(std::istream& in) {
    const Matrix m = read_matrix_csv(in);
    Grid<char> g(static_cast<int>(m.rows()), static_cast<int>(m.cols()), 0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (v != 0.0 && v != 1.0) throw Error("binary grid cells must be 0 or 1");
            g(static_cast<int>(i), static_cast<int>(j)) = v == 1.0 ? 1 : 0;
        }
    }
    return g;
}

Grid<char> read_binary_file(const std::string& path) {
    auto in = open_input(path);
    return read_binary_grid(in);
}

void write_binary_grid(std::ostream& out, const Grid<char>& grid) {
    for (int i = 0; i < grid.rows(); ++i) {
        for (int j = 0; j < grid.cols(); ++j) out << (j ? "," : "") << (grid(i, j) ? 1 : 0);
        out << '\n';
    }
}

ObservationMask mask_from_data(const Matrix& data) {
    std::vector<Entry> entries;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        for (Eigen::Index j = 0; j < data.cols(); ++j)
            if (!std::isnan(data(i, j))) entries.push_back({static_cast<int>(i), static_cast<int>(j)});
    return ObservationMask::from_entries(static_cast<int>(data.rows()), static_cast<int>(data.cols()),
                                         entries);
}

Json additive_report_json(const EstimateReport& report) {
    const int n = report.estimates.rows();
    const int m = report.estimates.cols();
    Json j;
    j["estimates"] = optional_grid_json(report.estimates);
    j["resistance"] = resistance_json(report.resistance);
    j["identifiable"] = grid_json(n, m, [&](int a, int b) { return report.identifiable(a, b); });
    if (report.variance_bound) j["variance_bound"] = optional_grid_json(*report.variance_bound);
    if (report.high_prob_bound) j["high_prob_bound"] = optional_grid_json(*report.high_prob_bound);
    return j;
}

Json rank1_report_json(const Rank1Report& report) {
    const int n = report.estimates.rows();
    const int m = report.estimates.cols();
    Json j;
    j["estimates"] = optional_grid_json(report.estimates);
    j["identifiable"] =
        grid_json(n, m, [&](int a, int b) { return report.status(a, b) != Rank1Status::no_path; });
    j["status"] = grid_json(n, m, [&](int a, int b) {
        switch (report.status(a, b)) {
            case Rank1Status::ok: return "ok";
            case Rank1Status::no_path: return "unidentifiable";
            case Rank1Status::degenerate_denominator: return "degenerate_denominator";
        }
        return "unknown";
    });
    j["k"] = grid_json(n, m, [&](int a, int b) { return report.k(a, b); });
    j["max_len"] = grid_json(n, m, [&](int a, int b) { return report.max_len(a, b); });
    return j;
}

Json causal_report_json(const CausalReport& report, const std::optional<EstimateGrid>& did) {
    const int n = report.beta_hat.rows();
    const int m = report.beta_hat.cols();
    Json j;
    j["beta_hat"] = optional_grid_json(report.beta_hat);
    j["control_estimates"] = optional_grid_json(report.control_estimates);
    j["treatment_estimates"] = optional_grid_json(report.treatment_estimates);
    j["control_resistance"] = resistance_json(report.control_resistance);
    j["treatment_resistance"] = resistance_json(report.treatment_resistance);
    j["resistance_sum"] = resistance_json(report.resistance_sum);
    j["identifiable"] = grid_json(n, m, [&](int a, int b) { return report.beta_hat(a, b).has_value(); });
    if (report.high_prob_bound) j["high_prob_bound"] = optional_grid_json(*report.high_prob_bound);
    if (did) j["did"] = optional_grid_json(*did);
    return j;
}

Json path_set_json(const BipartiteGraph& graph, const DisjointPathResult& result) {
    Json j;
    j["k"] = result.path_set.k;
    j["max_len"] = result.path_set.max_len;
    Json paths = Json::array();
    for (const auto& p : result.path_set.paths) {
        Json labels = Json::array();
        for (int v : p)
            labels.push_back(graph.is_left(v) ? "u" + std::to_string(v + 1)
                                              : "v" + std::to_string(v - graph.n_left() + 1));
        paths.push_back(std::move(labels));
    }
    j["paths"] = std::move(paths);
    Json cut = Json::array();
    for (const auto& [r, c] : result.cut.cut_edges) cut.push_back({r + 1, c + 1});
    j["cut_edges"] = std::move(cut);
    return j;
}

void write_resistance_csv(std::ostream& out, const std::vector<Entry>& pairs, const ResistanceGrid& r) {
    out << "row,col,effective_resistance\n";
    for (const auto& [i, j] : pairs)
        out << i + 1 << ',' << j + 1 << ',' << format_double(r(i, j).as_double()) << '\n';
}

std::string read_text_file(const std::string& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace flowmc::io
