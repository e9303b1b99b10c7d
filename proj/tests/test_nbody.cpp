#include "choreo/errors.hpp"
#include "choreo/nbody.hpp"
#include "choreo/scan.hpp"

#include "doctest.h"
#include "fixtures.hpp"

#include <random>

using namespace choreo;

TEST_SUITE("nbody_core") {

TEST_CASE("real arithmetic keeps the wider precision and round-trips exact strings") {
    const Real a("0.1", 20), b("0.3", 80);
    CHECK((a + b).digits() >= 80);
    const Real third = Real(1L, 100) / 3L;
    CHECK(Real(third.to_exact_string(), 100) == third);
    CHECK(matching_digits(Real("1.2345678", 30), Real("1.2345679", 30)) == 7);
    CHECK(pow10(-5, 30).to_string(3) == "1e-5");
    CHECK(Real("123.456", 30).to_string(4) == "1.235e2");
}

TEST_CASE("zero velocities give the collinear rest configuration") {
    const StateVector s = build_initial_state(Real(0L, 32), Real(0L, 32));
    CHECK(s[pos_x(0)] == -1L);
    CHECK(s[pos_y(0)] == 0L);
    CHECK(s[pos_x(1)] == 1L);
    CHECK(s[pos_y(1)] == 0L);
    CHECK(s[pos_x(2)] == 0L);
    CHECK(s[pos_y(2)] == 0L);
    for (int b = 0; b < 3; ++b) {
        CHECK(s[vel_x(b)].is_zero());
        CHECK(s[vel_y(b)].is_zero());
    }
}

TEST_CASE("middle body moves with minus twice the common velocity") {
    const auto t = fixtures::row119(40);
    const StateVector s = build_initial_state(t.vx, t.vy);
    CHECK(s[vel_x(0)] == t.vx);
    CHECK(s[vel_y(1)] == t.vy);
    CHECK(s[vel_x(2)] == Real("-0.83634736707302558", 40));
    CHECK(s[vel_y(2)] == Real("-1.08114425471540134", 40));
}

TEST_CASE("symmetric start has zero angular and linear momentum") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 20; ++n) {
        const StateVector s = build_initial_state(Real(u(rng), 50), Real(u(rng), 50));
        CHECK(abs(angular_momentum(s)) < pow10(-48, 50));
        const auto p = linear_momentum(s);
        CHECK(abs(p[0]) < pow10(-48, 50));
        CHECK(abs(p[1]) < pow10(-48, 50));
    }
}

TEST_CASE("angular momentum of a single moving body") {
    StateVector s = make_state(30);
    s[pos_y(0)] = Real(1L, 30);
    s[vel_x(0)] = Real(1L, 30);
    s[pos_x(1)] = Real(2L, 30);
    s[pos_x(2)] = Real(-2L, 30);
    CHECK(angular_momentum(s) == -1L);
}

TEST_CASE("equilateral triangle at rest accelerates towards the centroid") {
    const int d = 50;
    const Real side("1.5", d);
    const Real h = side * sqrt(Real(3L, d)) / 2L;
    StateVector s = make_state(d);
    s[pos_x(0)] = Real(0L, d);
    s[pos_y(0)] = Real(0L, d);
    s[pos_x(1)] = side;
    s[pos_y(1)] = Real(0L, d);
    s[pos_x(2)] = side / 2L;
    s[pos_y(2)] = h;
    const Real cx = (s[pos_x(0)] + s[pos_x(1)] + s[pos_x(2)]) / 3L;
    const Real cy = (s[pos_y(0)] + s[pos_y(1)] + s[pos_y(2)]) / 3L;
    const StateVector f = rhs(s);
    const Real expected = sqrt(Real(3L, d)) / (side * side);
    for (int b = 0; b < 3; ++b) {
        const Real ax = f[vel_x(b)], ay = f[vel_y(b)];
        CHECK(abs(hypot(ax, ay) - expected) < pow10(-45, d));
        // parallel to the direction of the centroid
        const Real rx = cx - s[pos_x(b)], ry = cy - s[pos_y(b)];
        CHECK(abs(ax * ry - ay * rx) < pow10(-45, d));
        CHECK((ax * rx + ay * ry).sign() > 0);
    }
}

TEST_CASE("middle body of the symmetric start feels no force") {
    const StateVector f = rhs(build_initial_state(Real("0.3", 40), Real("0.7", 40)));
    CHECK(f[vel_x(2)].is_zero());
    CHECK(f[vel_y(2)].is_zero());
    CHECK(f[vel_x(0)] == Real("1.25", 40));
    CHECK(f[pos_x(0)] == Real("0.3", 40));
}

TEST_CASE("collision threshold is enforced") {
    StateVector s = build_initial_state(Real(0L, 30), Real(0L, 30));
    s[pos_x(2)] = Real("0.9999999999", 30);
    CHECK_THROWS_AS(rhs(s, Real("1e-6", 30)), CollisionError);
}

TEST_CASE("energy of the symmetric start") {
    CHECK(energy(build_initial_state(Real(0L, 40), Real(0L, 40))) == Real("-2.5", 40));
    const Real e = energy(build_initial_state(Real("0.2", 40), Real("0.5", 40)));
    CHECK(abs(e - Real("-1.63", 40)) < pow10(-38, 40));
    CHECK(abs(initial_energy(Real("0.2", 40), Real("0.5", 40)) - e) < pow10(-38, 40));
}

TEST_CASE("scale-invariant period of the two k = 65 table rows") {
    const auto a = fixtures::row119(40);
    const auto b = fixtures::row120(40);
    CHECK(matching_digits(scale_invariant_period(a.period, a.vx, a.vy), Real(fixtures::kRow119TStar, 40)) >= 17);
    CHECK(matching_digits(scale_invariant_period(b.period, b.vx, b.vy), Real(fixtures::kRow120TStar, 40)) >= 17);
    CHECK(scale_invariant_period(Real(0L, 40), a.vx, a.vy).is_zero());
    const Real e = energy(build_initial_state(a.vx, a.vy));
    CHECK(abs(e - initial_energy(a.vx, a.vy)) < pow10(-37, 40));
}

TEST_CASE("zero energy has no scale-invariant period") {
    const Real vx = sqrt(Real(5L, 40) / 6L);
    CHECK_THROWS_AS(scale_invariant_period(Real(1L, 40), vx, Real(0L, 40)), ZeroEnergy);
}

TEST_CASE("cyclic relabelling has order three") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    StateVector s = make_state(64);
    for (auto& x : s) x = Real(u(rng), 64) / 7L;
    const StateVector p3 = cyclic_permute(cyclic_permute(cyclic_permute(s)));
    for (std::size_t i = 0; i < kDim; ++i) CHECK(mpfr_equal_p(p3[i].get(), s[i].get()));
    const StateVector p1 = cyclic_permute(s);
    CHECK(p1[pos_x(0)] == s[pos_x(1)]);
    CHECK(p1[vel_y(2)] == s[vel_y(0)]);
}

}  // TEST_SUITE
