#include "choreo/errors.hpp"
#include "choreo/topology.hpp"

#include "doctest.h"
#include "fixtures.hpp"

using namespace choreo;

namespace {

std::string power(const std::string& w, int k) {
    std::string out;
    for (int i = 0; i < k; ++i) out += w;
    return out;
}

Trajectory one_period(const Real& vx, const Real& vy, const Real& period, int d) {
    IntegratorConfig cfg = IntegratorConfig::for_digits(d);
    cfg.retain_expansions = true;
    return integrate_to(build_initial_state(vx, vy), period, cfg);
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("oriented area and middle body") {
    StateVector s = build_initial_state(Real("0.3", 30), Real("0.5", 30));
    CHECK(oriented_area(s).is_zero());
    CHECK(middle_body(s) == 3);
    s[pos_x(0)] = Real(0L, 30);
    s[pos_x(2)] = Real(-1L, 30);
    CHECK(middle_body(s) == 1);
    s[pos_y(2)] = Real(1L, 30);
    // (r2 - r1) x (r3 - r1) = (1, 0) x (-1, 1) = 1
    CHECK(oriented_area(s) == 1L);
}

TEST_CASE("figure-eight has six syzygies cycling through every body twice") {
    const auto fe = fixtures::figure_eight(40);
    const auto syz = detect_syzygies(one_period(fe.vx, fe.vy, fe.period, 40));
    REQUIRE(syz.size() == 6);
    for (std::size_t i = 0; i < 3; ++i) CHECK(syz[i].middle_body == syz[i + 3].middle_body);
    CHECK(syz[0].middle_body != syz[1].middle_body);
    CHECK(syz[1].middle_body != syz[2].middle_body);
    CHECK(syz[0].middle_body != syz[2].middle_body);
    CHECK(syz[0].t.is_zero());
    for (std::size_t i = 1; i < syz.size(); ++i) CHECK(syz[i].t > syz[i - 1].t);
    // consecutive collinear instants are a sixth of the period apart
    CHECK(abs(syz[1].t - fe.period / 6L) < Real("1e-15", 40));

    const FreeGroupWord w = read_word(syz);
    CHECK(w.canonical == "abAB");
    CHECK(satellite_power(w) == 1);
}

TEST_CASE("reflection y -> -y keeps the times and flips every sign") {
    const auto fe = fixtures::figure_eight(40);
    const auto a = detect_syzygies(one_period(fe.vx, fe.vy, fe.period, 40));
    const auto b = detect_syzygies(one_period(fe.vx, -fe.vy, fe.period, 40));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(abs(a[i].t - b[i].t) < Real("1e-18", 40));
        CHECK(a[i].middle_body == b[i].middle_body);
        CHECK(a[i].crossing_sign == -b[i].crossing_sign);
    }
}

TEST_CASE("streaming detection matches the retained trajectory") {
    const auto fe = fixtures::figure_eight(40);
    const auto a = detect_syzygies(one_period(fe.vx, fe.vy, fe.period, 40));
    const auto b = syzygies_over_period(fe, IntegratorConfig::for_digits(40));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].t == b[i].t);
}

TEST_CASE("syzygy detection needs retained expansions") {
    const auto fe = fixtures::figure_eight(32);
    const Trajectory t = integrate_to(build_initial_state(fe.vx, fe.vy), fe.period, IntegratorConfig::preset("scan"));
    CHECK_THROWS_AS(detect_syzygies(t), PreconditionError);
}

TEST_CASE("free and cyclic reduction") {
    CHECK(free_reduce("abBA") == "");
    CHECK(free_reduce("aabB") == "aa");
    CHECK(cyclic_reduce("bababAB") == "bab");
    CHECK_THROWS_AS(make_word("aAbB"), EmptyWord);
    CHECK(make_word("bABa").canonical == "abAB");
    CHECK(canonical_rotation("BabA") == "abAB");
    CHECK_THROWS_AS(free_reduce("abc"), PreconditionError);
}

TEST_CASE("satellite powers") {
    CHECK(satellite_power(make_word("abAB")) == 1);
    const std::string w65 = power("abAB", 65);
    CHECK(w65.size() == 260);
    CHECK(satellite_power(make_word(w65)) == 65);
    // any rotation reads the same
    CHECK(satellite_power(make_word(w65.substr(3) + w65.substr(0, 3))) == 65);
    CHECK_FALSE(satellite_power(make_word("abab")).has_value());
    CHECK_FALSE(satellite_power(make_word("abAb")).has_value());
}

TEST_CASE("choreography test") {
    const auto fe = fixtures::figure_eight();
    const IntegratorConfig desk = IntegratorConfig::preset("desk");
    const Real tol = pow10(-27, 64);
    const ChoreographyVerdict v = choreography_check(fe, 1, desk, tol);
    CHECK(v.choreography);
    CHECK(v.returns_at_third);
    CHECK(v.proximity < tol);

    const ChoreographyVerdict k3 = choreography_check(fe, 3, desk, tol);
    CHECK_FALSE(k3.choreography);
    CHECK_FALSE(k3.power_not_divisible_by_3);
    CHECK(k3.returns_at_third);

    CHECK(choreography_check(fe, 65, desk, tol).power_not_divisible_by_3);

    // a generic non-periodic start does not return at T/3
    const ChoreographyVerdict off = choreography_check({Real("0.3", 64), Real("0.5", 64), fe.period}, 1, desk, tol);
    CHECK_FALSE(off.choreography);
}

}  // TEST_SUITE
