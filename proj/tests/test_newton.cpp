#include "choreo/errors.hpp"
#include "choreo/newton.hpp"

#include "doctest.h"
#include "fixtures.hpp"

#include <random>

using namespace choreo;

TEST_SUITE("newton") {

TEST_CASE("damping update examples") {
    const Real one(1L, 30), half("0.5", 30), two(2L, 30);
    CHECK(tau_update(0.2, one, half, 0.2) == 0.4);
    CHECK(tau_update(0.2, one, two, 0.2) == 0.2);
    CHECK(tau_update(0.9, one, half, 0.2) == 1.0);
    CHECK_THROWS_AS(tau_update(0.2, one, Real(0L, 30), 0.2), PreconditionError);
}

TEST_CASE("tolerance defaults") {
    const NewtonConfig m = NewtonConfig::modified(IntegratorConfig::preset("desk"));
    CHECK(m.effective_tolerance() == pow10(-40, 64));
    CHECK(m.maxiter == 50);
    CHECK(m.tau0 == 0.2);
    const NewtonConfig c = NewtonConfig::classic(IntegratorConfig::preset("stage1"));
    CHECK(c.effective_tolerance() == pow10(-114, 134));
    CHECK(c.maxiter == 10);
    CHECK(parse_newton_mode("classic") == NewtonMode::Classic);
    CHECK_THROWS_AS(parse_newton_mode("quasi"), ConfigError);
    const PolishConfig p = PolishConfig::for_target(60);
    CHECK(p.primary.digits == 80);
    CHECK(p.verification.digits == 100);
    CHECK(PolishConfig{}.primary.digits == 212);
    CHECK(PolishConfig{}.tolerance_for(PolishConfig{}.primary) == pow10(-190, 212));
}

TEST_CASE("least squares on exact and orthogonal systems") {
    const int d = 40;
    Matrix a(kDim, 3, d);
    for (std::size_t i = 0; i < 3; ++i) a(i, i) = Real(1L, d);
    std::vector<Real> b(kDim, Real(0L, d));
    b[0] = Real(1L, d);
    b[1] = Real(2L, d);
    b[2] = Real(3L, d);
    auto x = solve_least_squares(a, b);
    CHECK(abs(x[0] - 1L) < pow10(-38, d));
    CHECK(abs(x[1] - 2L) < pow10(-38, d));
    CHECK(abs(x[2] - 3L) < pow10(-38, d));

    std::vector<Real> orth(kDim, Real(0L, d));
    orth[5] = Real(7L, d);
    orth[11] = Real(-2L, d);
    for (const auto& v : solve_least_squares(a, orth)) CHECK(abs(v) < pow10(-38, d));
}

TEST_CASE("least squares satisfies the normal equations") {
    const int d = 64;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(kDim, 3, d);
    std::vector<Real> b;
    for (std::size_t r = 0; r < kDim; ++r) {
        for (std::size_t c = 0; c < 3; ++c) a(r, c) = Real(u(rng), d) + Real(u(rng), d) / 997L;
        b.push_back(Real(u(rng), d));
    }
    const auto x = solve_least_squares(a, b);
    const Matrix at = a.transposed();
    const auto ax = a * x;
    std::vector<Real> res;
    for (std::size_t r = 0; r < kDim; ++r) res.push_back(ax[r] - b[r]);
    for (const auto& v : at * res) CHECK(abs(v) < pow10(-50, d));
}

TEST_CASE("rank-deficient systems are reported") {
    const int d = 40;
    Matrix a(kDim, 3, d);
    for (std::size_t r = 0; r < kDim; ++r) {
        a(r, 0) = Real(static_cast<long>(r + 1), d);
        a(r, 1) = Real(static_cast<long>(2 * r + 2), d);
        a(r, 2) = Real(1L, d);
    }
    CHECK_THROWS_AS(solve_least_squares(a, std::vector<Real>(kDim, Real(1L, d))), RankDeficient);
}

TEST_CASE("residual of a zero-length integration vanishes") {
    const Residual r = residual({Real("0.3", 32), Real("0.5", 32), Real(0L, 32)}, IntegratorConfig::preset("scan"));
    CHECK(r.norm.is_zero());
    CHECK(r.vec.size() == kDim);
}

TEST_CASE("polished figure-eight is a fixed point of the correction") {
    const auto fe = fixtures::figure_eight();
    const IntegratorConfig desk = IntegratorConfig::preset("desk");
    CHECK(residual(fe, desk).norm < pow10(-50, 64));
    const LinearSystem sys = build_system(fe, desk);
    for (const auto& v : sys.b) CHECK(abs(v) < pow10(-50, 64));
    for (const auto& v : solve_least_squares(sys.a, sys.b)) CHECK(abs(v) < pow10(-45, 64));

    const NewtonResult r = correct(fe, NewtonConfig::classic(desk));
    CHECK(r.converged);
    CHECK(r.trace.size() == 1);
    CHECK(r.triplet.vx == fe.vx);
}

TEST_CASE("modified Newton from a three-digit figure-eight seed") {
    const IntegratorConfig desk = IntegratorConfig::preset("desk");
    const NewtonResult r = correct({Real("0.347", 64), Real("0.533", 64), Real("6.33", 64)},
                                   NewtonConfig::modified(desk));
    REQUIRE(r.converged);
    CHECK(r.trace.front().tau == 0.2);
    CHECK(matching_digits(r.triplet.period, fixtures::figure_eight().period) >= 30);

    PolishConfig pc = PolishConfig::for_target(44);
    CHECK(pc.primary.digits == 64);
    const PolishResult p = polish(r.triplet, pc);
    CHECK(residual(p.triplet, desk).norm < pow10(-50, 64));
    CHECK(p.matched_digits >= 44);
}

TEST_CASE("two-precision polish at 60 digits converges quadratically") {
    // six correct digits leave room for three quadratic iterates above the floor
    const auto fe = fixtures::figure_eight();
    const SearchTriplet start{Real(fe.vx.to_string(6), 80), Real(fe.vy.to_string(6), 80),
                              Real(fe.period.to_string(6), 80)};
    const PolishResult p = polish(start, PolishConfig::for_target(60));
    CHECK(p.matched_digits >= 60);
    CHECK(p.primary_run.trace.size() >= 3);
    REQUIRE(p.quadratic_slope.has_value());
    CHECK(*p.quadratic_slope >= 1.8);
    // exponents roughly double from one iterate to the next
    const auto& tr = p.primary_run.trace;
    CHECK(log10(tr[1].residual).to_double() < 1.6 * log10(tr[0].residual).to_double());
}

TEST_CASE("quadratic slope over synthetic residual histories") {
    std::vector<IterationRecord> tr;
    for (long e : {4, 8, 16, 32, 100}) tr.push_back({0, pow10(-e, 120), 1.0, Real(), Real(), Real()});
    // the last residual sits below the floor and is ignored
    auto s = quadratic_slope(tr, pow10(-60, 120));
    REQUIRE(s.has_value());
    CHECK(*s == doctest::Approx(2.0));
    CHECK_FALSE(quadratic_slope(tr, pow10(-10, 120)).has_value());
}

TEST_CASE("escaping iterates end as a divergence with a cause") {
    NewtonConfig cfg = NewtonConfig::modified(IntegratorConfig::preset("scan"));
    cfg.t0 = 3.0;
    cfg.maxiter = 6;
    const NewtonResult r = correct({Real("0.9", 32), Real("0.9", 32), Real("8", 32)}, cfg);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.cause.empty());
    CHECK_FALSE(r.trace.empty());
}

TEST_CASE("invalid Newton settings are rejected") {
    NewtonConfig cfg;
    cfg.tau0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = NewtonConfig{};
    cfg.tolerance = Real(-1L, 30);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
