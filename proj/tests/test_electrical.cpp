#include <doctest.h>

#include <random>

#include "flowmc/electrical.hpp"
#include "oracles.hpp"

using namespace flowmc;

namespace {

// u1 -> v2 -> u2 -> v1 and u1 -> v3 -> u3 -> v1, no direct (u1, v1) cell.
ObservationMask two_parallel_paths() {
    return ObservationMask::from_entries(3, 3, {{0, 1}, {1, 1}, {1, 0}, {0, 2}, {2, 2}, {2, 0}});
}

}  // namespace

TEST_CASE("voltages") {
    const auto g = build_graph(ObservationMask::full(1, 1));
    const SpectralCore core(g);
    const auto v = voltage_vector(core, 0, 0);
    CHECK(v.potentials(0) == doctest::Approx(0.5));
    CHECK(v.potentials(1) == doctest::Approx(-0.5));

    const SpectralCore k22(build_graph(ObservationMask::full(2, 2)));
    const auto w = voltage_vector(k22, 0, 0);
    CHECK(w.potentials(0) - w.potentials(2) == doctest::Approx(0.75));

    const SpectralCore split(build_graph(ObservationMask::from_entries(2, 2, {{0, 0}, {1, 1}})));
    CHECK_THROWS_AS(voltage_vector(split, 0, 1), DisconnectedPair);
}

TEST_CASE("electrical flow examples") {
    const auto g1 = build_graph(ObservationMask::full(1, 1));
    const SpectralCore c1(g1);
    const auto f1 = electrical_flow(g1, c1, 0, 0);
    CHECK(f1.values(0) == doctest::Approx(1.0));
    CHECK(flow_energy(f1) == doctest::Approx(1.0));
    CHECK(effective_resistance(c1, 0, 0).value() == doctest::Approx(1.0));

    const auto g = build_graph(two_parallel_paths());
    const SpectralCore c(g);
    const auto f = electrical_flow(g, c, 0, 0);
    for (int e = 0; e < g.n_edges(); ++e) CHECK(std::abs(f.values(e)) == doctest::Approx(0.5));
    CHECK(effective_resistance(c, 0, 0).value() == doctest::Approx(1.5));
    CHECK(verify_unit_flow(f, g, 0, 0));

    // Short path u1 -> v2 -> u2 -> v1 against a long path through u3, u4.
    const auto uneven = ObservationMask::from_entries(
        4, 4, {{0, 1}, {1, 1}, {1, 0}, {0, 2}, {2, 2}, {2, 3}, {3, 3}, {3, 0}});
    const auto gu = build_graph(uneven);
    const SpectralCore cu(gu);
    const auto fu = electrical_flow(gu, cu, 0, 0);
    CHECK(std::abs(fu.values(gu.edge_index(0, 1))) > std::abs(fu.values(gu.edge_index(0, 2))));
    CHECK(fu.values(gu.edge_index(0, 1)) == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("effective resistance") {
    const SpectralCore k22(build_graph(ObservationMask::full(2, 2)));
    CHECK(effective_resistance(k22, 0, 0).value() == doctest::Approx(0.75));

    const SpectralCore split(build_graph(ObservationMask::from_entries(2, 2, {{0, 0}, {1, 1}})));
    CHECK_FALSE(effective_resistance(split, 0, 1).is_finite());
    CHECK(effective_resistance(split, 1, 1).value() == doctest::Approx(1.0));

    for (int n = 1; n <= 6; ++n) {
        for (int m = 1; m <= 6; ++m) {
            const auto mask = ObservationMask::full(n, m);
            const SpectralCore core(build_graph(mask));
            const double expected = static_cast<double>(n + m - 1) / (n * m);
            CHECK(effective_resistance(core, n - 1, 0).value() == doctest::Approx(expected).epsilon(1e-10));
            CHECK(oracle::resistance(mask, n - 1, 0) == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("potential gap equals resistance and all_resistances agrees") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto mask = oracle::random_connected_mask(6, 7, 0.15, rng);
        const auto g = build_graph(mask);
        const SpectralCore core(g);
        const auto all = all_resistances(core);
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 7; ++j) {
                const auto v = voltage_vector(core, i, j);
                const double r = effective_resistance(core, i, j).value();
                CHECK(std::abs(v.potentials(i) - v.potentials(6 + j) - r) < 1e-10);
                CHECK(std::abs(all(i, j).value() - r) < 1e-12);
                CHECK(std::abs(r - oracle::resistance(mask, i, j)) < 1e-9);
                const auto f = electrical_flow(g, core, i, j);
                CHECK(std::abs(flow_energy(f) - r) < 1e-9);
            }
        }
    }
}

TEST_CASE("verify_unit_flow") {
    const auto g = build_graph(ObservationMask::from_entries(3, 3, {{0, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 0}}));
    UnitFlow zero{Vector::Zero(5), 0, 0};
    CHECK_FALSE(verify_unit_flow(zero, g, 0, 0));
    const auto p = path_flow(g, {0, 4, 1, 5, 2, 3});
    CHECK(verify_unit_flow(p, g, 0, 0));
    // edges in row-major order: (0,1) (1,1) (1,2) (2,0) (2,2)
    CHECK(p.values(0) == 1.0);
    CHECK(p.values(1) == -1.0);
    CHECK(p.values(2) == 1.0);
    CHECK(p.values(3) == 1.0);
    CHECK(p.values(4) == -1.0);
}

TEST_CASE("Thomson principle over perturbed unit flows") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int graph_trial = 0; graph_trial < 5; ++graph_trial) {
        const auto mask = oracle::random_connected_mask(6, 6, 0.3, rng);
        const auto g = build_graph(mask);
        const SpectralCore core(g);
        const auto electrical = electrical_flow(g, core, 0, 0);
        const double r = effective_resistance(core, 0, 0).value();
        int strictly_above = 0;
        for (int k = 0; k < 120; ++k) {
            Vector dir(g.n_edges());
            for (auto& x : dir) x = gauss(rng);
            const auto f = add_circulation(g, core, electrical, dir);
            REQUIRE(verify_unit_flow(f, g, 0, 0));
            const double energy = flow_energy(f);
            CHECK(energy >= r - 1e-10);
            const double distance = (f.values - electrical.values).norm();
            if (distance > 1e-6) {
                CHECK(energy > r);
                ++strictly_above;
            }
            // Energy gap is exactly the squared distance to the electrical flow.
            CHECK(std::abs(energy - r - distance * distance) < 1e-8);
        }
        CHECK(strictly_above > 0);
        // zero circulation leaves the electrical flow unchanged
        const auto same = add_circulation(g, core, electrical, Vector::Zero(g.n_edges()));
        CHECK((same.values - electrical.values).norm() < 1e-12);
    }
}

TEST_CASE("Rayleigh monotonicity") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        auto mask = oracle::random_connected_mask(5, 6, 0.1, rng);
        const double before = effective_resistance(SpectralCore(build_graph(mask)), 0, 0).value();
        std::uniform_int_distribution<int> r(0, 4), c(0, 5);
        mask.insert(r(rng), c(rng));
        const double after = effective_resistance(SpectralCore(build_graph(mask)), 0, 0).value();
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("commute time of a random walk matches 2 n_e R") {
    std::mt19937_64 rng(31);
    const auto mask = oracle::random_connected_mask(4, 4, 0.35, rng);
    const auto g = build_graph(mask);
    const SpectralCore core(g);
    const double r = effective_resistance(core, 0, 0).value();
    const double expected = 2.0 * g.n_edges() * r;
    const int walks = 20000;
    long total = 0;
    for (int w = 0; w < walks; ++w) {
        int v = 0;
        int target = g.col_vertex(0);
        int phase = 0;
        while (phase < 2) {
            const auto& nb = g.neighbors(v);
            std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
            v = nb[pick(rng)];
            ++total;
            if (v == target) {
                ++phase;
                target = 0;
            }
        }
    }
    const double mean = static_cast<double>(total) / walks;
    CHECK(std::abs(mean - expected) / expected < 0.05);
}
