#include "choreo/errors.hpp"
#include "choreo/scan.hpp"

#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace choreo;

namespace {

SearchDomain figure_eight_patch() {
    SearchDomain d;
    d.vx_lo = 0.33;
    d.vx_hi = 0.36;
    d.vy_lo = 0.52;
    d.vy_hi = 0.54;
    d.step = GridStep::parse("1/256");
    return d;
}

}  // namespace

TEST_SUITE("scan") {

TEST_CASE("grid step parsing") {
    const GridStep s = GridStep::parse("1/4096");
    CHECK(s.num == 1);
    CHECK(s.den == 4096);
    CHECK(s.to_string() == "1/4096");
    CHECK(s.value(30) == Real(1L, 30) / 4096L);
    CHECK_THROWS_AS(GridStep::parse("0.001"), ConfigError);
    CHECK_THROWS_AS(GridStep::parse("1/0"), ConfigError);
    CHECK_THROWS_AS(GridStep::parse("-1/4"), ConfigError);
}

TEST_CASE("grid points of a rectangle and a mask") {
    SearchDomain d = figure_eight_patch();
    const auto pts = d.grid_points();
    // i in 85..92 (0.33*256 = 84.5, 0.36*256 = 92.2), j in 134..138
    CHECK(pts.size() == 8 * 5);
    CHECK(pts.front() == std::array<long, 2>{85, 134});
    CHECK(pts.back() == std::array<long, 2>{92, 138});

    SearchDomain m;
    m.vx_lo = m.vx_hi = 0.0;
    m.vy_lo = m.vy_hi = 0.0;
    m.step = GridStep::parse("1/4");
    m.mask = {{-0.1, -0.1}, {1.2, -0.1}, {-0.1, 1.2}};
    CHECK(m.contains(0.25, 0.25));
    CHECK_FALSE(m.contains(1.0, 1.0));
    // (i, j) * 1/4 with i + j <= 4
    CHECK(m.grid_points().size() == 15);

    SearchDomain bad = figure_eight_patch();
    bad.vx_hi = 0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("return proximity needs a horizon beyond t = 1") {
    CHECK_THROWS_AS(return_proximity(Real("0.3", 32), Real("0.5", 32), Real(1L, 32), IntegratorConfig::preset("scan")),
                    PreconditionError);
}

TEST_CASE("polished choreography returns under relabelling at a third of its period") {
    const auto fe = fixtures::figure_eight();
    const ProximityResult p = return_proximity(fe.vx, fe.vy, Real(3L, 64), IntegratorConfig::preset("desk"));
    CHECK(p.r_min < Real("1e-5", 64));
    CHECK(abs(p.t_min - fe.period / 3L) < Real("1e-5", 64));
    CHECK_FALSE(p.collided);
}

TEST_CASE("figure-eight grid cell is a near return") {
    const Real h = GridStep::parse("1/256").value(32);
    const ProximityResult p =
        return_proximity(h * 89L, h * 136L, Real(10L, 32), IntegratorConfig::preset("scan"));
    CHECK(p.r_min < Real("0.1", 32));
    CHECK(p.t_min > Real("2.0", 32));
    CHECK(p.t_min < Real("2.2", 32));
}

TEST_CASE("escaping bodies give no candidates") {
    SearchDomain d;
    d.vx_lo = d.vx_hi = 0.9;
    d.vy_lo = d.vy_hi = 0.9;
    d.step = GridStep::parse("1/256");
    ScanOptions o;
    o.t0 = Real(5L, 32);
    REQUIRE(d.grid_points().size() == 0);
    d.vx_lo = 0.89;
    d.vx_hi = 0.91;
    d.vy_lo = 0.89;
    d.vy_hi = 0.91;
    CHECK(d.grid_points().size() > 0);
    CHECK(scan_domain(d, o).empty());
}

TEST_CASE("local minima are strict over the eight neighbours") {
    std::vector<GridValue> v;
    const double r[3][3] = {{0.5, 0.4, 0.5}, {0.3, 0.05, 0.2}, {0.5, 0.4, 0.5}};
    for (long i = 0; i < 3; ++i) {
        for (long j = 0; j < 3; ++j) v.push_back({i, j, r[i][j], "", "", 1});
    }
    auto m = local_minima(v, 0.1);
    REQUIRE(m.size() == 1);
    CHECK(v[m[0]].i == 1);
    CHECK(v[m[0]].j == 1);
    CHECK(local_minima(v, 0.01).empty());
    // ties are not strict minima
    v[1].r = 0.05;
    CHECK(local_minima(v, 0.1).empty());
    // collisions never qualify
    v.assign(1, {0, 0, std::numeric_limits<double>::infinity(), "", "", 1});
    CHECK(local_minima(v, 0.1).empty());
}

TEST_CASE("scan around the figure-eight finds it and resumes from a checkpoint") {
    const auto dir = std::filesystem::temp_directory_path() / "choreo_scan_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ScanOptions o;
    o.t0 = Real(10L, 32);
    o.workers = 2;
    o.checkpoint = dir / "ck.jsonl";
    const auto first = scan_domain(figure_eight_patch(), o);
    REQUIRE_FALSE(first.empty());
    bool found = false;
    for (const auto& c : first) {
        CHECK(c.r_value < Real("0.1", 32));
        if (c.t_min > Real("2.0", 32) && c.t_min < Real("2.2", 32)) {
            found = true;
            CHECK(abs(c.t_guess - c.t_min * 3L) < Real("1e-20", 32));
        }
    }
    CHECK(found);

    // a rerun reads every point back from the checkpoint
    const auto second = scan_domain(figure_eight_patch(), o);
    REQUIRE(second.size() == first.size());
    for (std::size_t n = 0; n < first.size(); ++n) {
        CHECK(second[n].i == first[n].i);
        CHECK(second[n].r_value == first[n].r_value);
    }

    // a torn final line is tolerated
    { std::ofstream(dir / "ck.jsonl", std::ios::app) << "{\"i\": 3"; }
    CHECK(scan_domain(figure_eight_patch(), o).size() == first.size());

    o.t0 = Real(11L, 32);
    CHECK_THROWS_AS(scan_domain(figure_eight_patch(), o), ConfigError);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
