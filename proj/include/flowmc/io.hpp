#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowmc/additive.hpp"
#include "flowmc/common.hpp"
#include "flowmc/graph.hpp"
#include "flowmc/maxflow.hpp"
#include "flowmc/panel.hpp"
#include "flowmc/rank1.hpp"

namespace flowmc::io {

using Json = nlohmann::json;

/// Shortest text that round-trips: 17 significant digits, `inf` / `-inf` / `nan`.
std::string format_double(double x);

/// Mask file: header `row,col`, 1-based indices. Dimensions default to the
/// largest indices present. `duplicates` receives the number of repeated pairs.
ObservationMask read_mask_csv(std::istream& in, std::optional<int> rows = std::nullopt,
                              std::optional<int> cols = std::nullopt, int* duplicates = nullptr);
ObservationMask read_mask_file(const std::string& path, std::optional<int> rows = std::nullopt,
                               std::optional<int> cols = std::nullopt, int* duplicates = nullptr);
void write_mask_csv(std::ostream& out, const ObservationMask& mask);

/// Numeric CSV grid without header. Empty cells and `NaN` read as NaN.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_file(const std::string& path);
/// NaN cells are written as `nan_text`.
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::string& nan_text = "");

/// 0/1 grid CSV (treatment indicators).
Grid<char> read_binary_grid(std::istream& in);
Grid<char> read_binary_file(const std::string& path);
void write_binary_grid(std::ostream& out, const Grid<char>& grid);

/// Cells of `data` that are not NaN.
ObservationMask mask_from_data(const Matrix& data);

Json additive_report_json(const EstimateReport& report);
Json rank1_report_json(const Rank1Report& report);
Json causal_report_json(const CausalReport& report, const std::optional<EstimateGrid>& did = std::nullopt);
/// Paths use 1-based labels "u<i>" / "v<j>"; cut edges are 1-based [row, col].
Json path_set_json(const BipartiteGraph& graph, const DisjointPathResult& result);

/// CSV rows `row,col,effective_resistance` (1-based, `inf` when disconnected).
void write_resistance_csv(std::ostream& out, const std::vector<Entry>& pairs, const ResistanceGrid& r);

std::string read_text_file(const std::string& path);

}  // namespace flowmc::io
