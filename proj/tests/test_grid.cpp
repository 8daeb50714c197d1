#include <cstdio>
#include <vector>

#include "ctmle/csv.hpp"
#include "ctmle/grid.hpp"
#include "ctmle/simulate.hpp"
#include "doctest.h"

using namespace ctmle;

TEST_CASE("uniform grid without padding") {
    const std::vector<double> sample{0.0, 1.0};
    const auto grid = build_grid(sample, 3, 0.0, -1e30, 1e30);
    REQUIRE(grid.m == 3);
    CHECK(grid.points[0] == doctest::Approx(0.0));
    CHECK(grid.points[1] == doctest::Approx(0.5));
    CHECK(grid.points[2] == doctest::Approx(1.0));
    CHECK(grid.steps[0] == doctest::Approx(0.5));
    CHECK(grid.max_step() == doctest::Approx(0.5));
}

TEST_CASE("positive-domain grids clip the left edge above zero") {
    // Range [0.01, 0.41], pad 0.1 of the range (0.04) would reach -0.03;
    // the edge is clipped to eps = 1e-4 * max(sample) = 4.1e-5.
    const std::vector<double> sample{0.01, 0.41};
    const auto grid = build_grid(sample, 300, 0.1, 0.0, 1e30);
    CHECK(grid.points[0] == doctest::Approx(4.1e-5).epsilon(1e-12));
    CHECK(grid.points[grid.m - 1] == doctest::Approx(0.45).epsilon(1e-12));
    // Padding stays when it does not cross the domain edge.
    const std::vector<double> inner{1.0, 2.0};
    const auto g2 = build_grid(inner, 10, 0.1, 0.0, 1e30);
    CHECK(g2.points[0] == doctest::Approx(0.9));
    CHECK(g2.points[9] == doctest::Approx(2.1));
}

TEST_CASE("grid covers a simulated mean-reverting path") {
    SimulationConfig cfg;
    cfg.model = find_model("ou");
    cfg.theta = Eigen::Vector3d(4.0, 0.2, 0.4);
    cfg.s0 = 0.2;
    cfg.delta = 1.0 / 250.0;
    cfg.n = 1250;
    cfg.scheme = Scheme::Exact;
    cfg.seed = 5;
    const auto path = simulate_path(cfg);
    const auto grid = build_grid(path, 300, 0.1, cfg.model);
    double lo = path[0], hi = path[0];
    for (double x : path) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(grid.covers(lo, hi));
}

TEST_CASE("degenerate samples are rejected") {
    const std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK_THROWS_AS(build_grid(flat, 10, 0.1, -1e30, 1e30), DataError);
    const std::vector<double> tiny{1.0};
    CHECK_THROWS_AS(build_grid(tiny, 10, 0.1, -1e30, 1e30), DataError);
}

TEST_CASE("nearest-point binning with lower-index tie break") {
    StateSpace grid;
    grid.m = 3;
    grid.points = Eigen::Vector3d(0.0, 0.5, 1.0);
    grid.steps = Eigen::Vector2d(0.5, 0.5);

    SUBCASE("exact hits") {
        const std::vector<double> s{0.0, 0.5, 1.0};
        const auto b = bin_sample(s, grid, 0.1);
        CHECK(b.indices == std::vector<int>{0, 1, 2});
        CHECK(b.clipped == 0);
        CHECK(b.delta == 0.1);
    }
    SUBCASE("nearest point wins") {
        const auto b = bin_sample(std::vector<double>{0.249, 0.251}, grid, 0.1);
        CHECK(b.indices == std::vector<int>{0, 1});
    }
    SUBCASE("midpoints break to the lower index") {
        const auto b = bin_sample(std::vector<double>{0.25, 0.75}, grid, 0.1);
        CHECK(b.indices == std::vector<int>{0, 1});
    }
    SUBCASE("out-of-range values clip to the endpoints and are counted") {
        const auto b = bin_sample(std::vector<double>{-3.0, 4.0, 0.5}, grid, 0.1);
        CHECK(b.indices == std::vector<int>{0, 2, 1});
        CHECK(b.clipped == 2);
    }
}

TEST_CASE("csv round trip and numeric extraction") {
    const std::string path = "test_grid_tmp.csv";
    CsvTable t;
    t.header = {"DATE", "VALUE"};
    t.rows = {{"2020-01-02", "1.5"}, {"2020-01-03", "."}, {"2020-01-06", "1.75"},
              {"2020-01-07", ""},    {"2020-01-08", "2"}};
    write_csv(path, t);
    const CsvTable back = read_csv(path);
    CHECK(back.header == t.header);
    CHECK(back.rows.size() == 5);
    int missing = -1;
    const auto vals = numeric_column(back, "VALUE", &missing);
    CHECK(vals == std::vector<double>{1.5, 1.75, 2.0});
    CHECK(missing == 2);
    CHECK_THROWS_AS(numeric_column(back, "PRICE", nullptr), DataError);
    CsvTable bad = back;
    bad.rows[0][1] = "one-point-five";
    CHECK_THROWS_AS(numeric_column(bad, "VALUE", nullptr), DataError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_csv("no_such_file.csv"), DataError);
}
