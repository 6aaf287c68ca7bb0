#include <doctest.h>

#include <cmath>
#include <sstream>

#include "flowmc/io.hpp"
#include "flowmc/maxflow.hpp"
#include "flowmc/sim.hpp"

using namespace flowmc;

TEST_CASE("format_double") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(io::format_double(std::nan("")) == "nan");
}

TEST_CASE("mask csv round trip") {
    std::istringstream in("row,col\n1,2\n2,2\n1,2\n3,1\n");
    int dup = 0;
    const auto mask = io::read_mask_csv(in, std::nullopt, std::nullopt, &dup);
    CHECK(dup == 1);
    CHECK(mask.n_rows() == 3);
    CHECK(mask.n_cols() == 2);
    CHECK(mask.observed(0, 1));
    CHECK(mask.observed(2, 0));
    std::ostringstream out;
    io::write_mask_csv(out, mask);
    CHECK(out.str() == "row,col\n1,2\n2,2\n3,1\n");

    std::istringstream sized("row,col\n1,1\n");
    CHECK(io::read_mask_csv(sized, 4, 5).n_cols() == 5);
    std::istringstream bad("r,c\n1,1\n");
    CHECK_THROWS_AS(io::read_mask_csv(bad), Error);
    std::istringstream zero("row,col\n0,1\n");
    CHECK_THROWS_AS(io::read_mask_csv(zero), Error);
    std::istringstream outside("row,col\n5,1\n");
    CHECK_THROWS_AS(io::read_mask_csv(outside, 2, 2), InvalidArgument);
}

TEST_CASE("matrix csv") {
    std::istringstream in("1,2,\nNaN,4.5,6\n");
    const Matrix m = io::read_matrix_csv(in);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(std::isnan(m(0, 2)));
    CHECK(std::isnan(m(1, 0)));
    CHECK(m(1, 1) == 4.5);
    const auto mask = io::mask_from_data(m);
    CHECK(mask.count() == 4);
    std::ostringstream out;
    io::write_matrix_csv(out, m);
    CHECK(out.str() == "1,2,\n,4.5,6\n");
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(io::read_matrix_csv(ragged), Error);
    std::istringstream text("1,x\n");
    CHECK_THROWS_AS(io::read_matrix_csv(text), Error);
}

TEST_CASE("binary grid") {
    std::istringstream in("0,1\n1,0\n");
    const auto g = io::read_binary_grid(in);
    CHECK(g(0, 1) == 1);
    CHECK(g(1, 1) == 0);
    std::ostringstream out;
    io::write_binary_grid(out, g);
    CHECK(out.str() == "0,1\n1,0\n");
    std::istringstream bad("0,2\n");
    CHECK_THROWS_AS(io::read_binary_grid(bad), Error);
}

TEST_CASE("json reports") {
    const auto mask = ObservationMask::from_entries(2, 2, {{0, 0}, {1, 1}});
    Matrix y(2, 2);
    y << 1, 0, 0, 2;
    const auto j = io::additive_report_json(efe_full(mask, y, 0.1, 0.05));
    CHECK(j["estimates"][0][1].is_null());
    CHECK(j["estimates"][0][0].get<double>() == doctest::Approx(1.0));
    CHECK(j["resistance"][0][1] == "inf");
    CHECK(j["identifiable"][1][1] == true);
    CHECK(j.contains("variance_bound"));

    const auto r = io::rank1_report_json(rank1_full(mask, y));
    CHECK(r["status"][0][1] == "unidentifiable");
    CHECK(r["k"][0][0] == 1);

    const auto g = build_graph(extreme_sparsity_mask(3));
    const auto p = io::path_set_json(g, disjoint_paths_and_cut(g, 0, 0));
    CHECK(p["k"] == 2);
    CHECK(p["paths"][0][0] == "u1");
    CHECK(p["paths"][0][3] == "v1");
    CHECK(p["cut_edges"].size() == 2);
}

TEST_CASE("resistance csv") {
    const SpectralCore core(build_graph(ObservationMask::from_entries(2, 2, {{0, 0}, {1, 1}})));
    std::ostringstream out;
    io::write_resistance_csv(out, {{0, 0}, {0, 1}}, all_resistances(core));
    CHECK(out.str() == "row,col,effective_resistance\n1,1,1\n1,2,inf\n");
}
