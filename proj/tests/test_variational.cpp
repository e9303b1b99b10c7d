#include "choreo/errors.hpp"
#include "choreo/variational.hpp"

#include "doctest.h"
#include "fixtures.hpp"

#include <random>

using namespace choreo;

TEST_SUITE("variational") {

TEST_CASE("jacobian matches central differences of the vector field") {
    const int d = 64;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    StateVector s = build_initial_state(Real("0.3", d), Real("0.45", d));
    for (auto& x : s) x += Real(u(rng), d);
    const Matrix j = jacobian(s);
    const Real eps("1e-20", d);
    for (std::size_t c = 0; c < kDim; ++c) {
        StateVector p = s, m = s;
        p[c] += eps;
        m[c] -= eps;
        const StateVector fp = rhs(p), fm = rhs(m);
        for (std::size_t r = 0; r < kDim; ++r) {
            const Real fd = (fp[r] - fm[r]) / (eps * 2L);
            CHECK(abs(fd - j(r, c)) < pow10(-30, d));
        }
    }
}

TEST_CASE("sensitivities start from the initial-condition pattern") {
    const int d = 40;
    const SensitivityState s =
        integrate_param_sensitivities(Real("0.3", d), Real("0.5", d), Real(0L, d), IntegratorConfig::for_digits(d));
    const StateVector ex = initial_state_derivative_vx(d), ey = initial_state_derivative_vy(d);
    for (std::size_t i = 0; i < kDim; ++i) {
        CHECK(s.columns[0][i] == ex[i]);
        CHECK(s.columns[1][i] == ey[i]);
    }
    CHECK(ex[vel_x(0)] == 1L);
    CHECK(ex[vel_x(2)] == -2L);
    CHECK(ey[vel_y(1)] == 1L);
}

TEST_CASE("parameter sensitivities agree with finite differences of the flow") {
    const int d = 64;
    const IntegratorConfig cfg = IntegratorConfig::preset("desk");
    const auto fe = fixtures::figure_eight(d);
    const Real t(2L, d);
    const SensitivityState s = integrate_param_sensitivities(fe.vx, fe.vy, t, cfg);
    const Real eps("1e-20", d);
    auto flow = [&](const Real& vx, const Real& vy) {
        return integrate_to(build_initial_state(vx, vy), t, cfg).final_state();
    };
    const StateVector xp = flow(fe.vx + eps, fe.vy), xm = flow(fe.vx - eps, fe.vy);
    const StateVector yp = flow(fe.vx, fe.vy + eps), ym = flow(fe.vx, fe.vy - eps);
    for (std::size_t i = 0; i < kDim; ++i) {
        CHECK(abs((xp[i] - xm[i]) / (eps * 2L) - s.columns[0][i]) < pow10(-25, d));
        CHECK(abs((yp[i] - ym[i]) / (eps * 2L) - s.columns[1][i]) < pow10(-25, d));
    }
}

TEST_CASE("monodromy at t = 0 is the identity") {
    const auto fe = fixtures::figure_eight(40);
    const Matrix m = integrate_monodromy_to(build_initial_state(fe.vx, fe.vy), Real(0L, 40),
                                            IntegratorConfig::for_digits(40));
    for (std::size_t r = 0; r < kDim; ++r) {
        for (std::size_t c = 0; c < kDim; ++c) CHECK(m(r, c) == (r == c ? 1L : 0L));
    }
}

TEST_CASE("flow derivative is symplectic with unit determinant") {
    const int d = 64;
    const auto fe = fixtures::figure_eight(d);
    const Matrix m = integrate_monodromy_to(build_initial_state(fe.vx, fe.vy), Real("1.5", d),
                                            IntegratorConfig::preset("desk"));
    CHECK(abs(determinant(m) - 1L) < pow10(-50, d));
    // M^T J M = J with J = [[0, I], [-I, 0]] in (positions, velocities)
    Matrix jm(kDim, kDim, d);
    for (std::size_t i = 0; i < 6; ++i) {
        jm(i, i + 6) = Real(1L, d);
        jm(i + 6, i) = Real(-1L, d);
    }
    const Matrix w = m.transposed() * jm * m;
    for (std::size_t r = 0; r < kDim; ++r) {
        for (std::size_t c = 0; c < kDim; ++c) CHECK(abs(w(r, c) - jm(r, c)) < pow10(-50, d));
    }
}

TEST_CASE("monodromy of a truncated orbit is refused") {
    const auto fe = fixtures::figure_eight(40);
    SearchTriplet off = fe;
    off.period += Real("1e-6", 40);
    CHECK_THROWS_AS(integrate_monodromy(off, IntegratorConfig::for_digits(40), Real("1e-20", 40)), NotPeriodic);
}

TEST_CASE("matrix helpers") {
    Matrix a(3, 3, 30);
    const long v[3][3] = {{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) a(r, c) = Real(v[r][c], 30);
    }
    CHECK(abs(determinant(a) - 4L) < pow10(-28, 30));
    CHECK(max_abs(a) == 2L);
    const auto x = a * std::vector<Real>{Real(1L, 30), Real(1L, 30), Real(1L, 30)};
    CHECK(x[0] == 1L);
    CHECK(x[1] == 0L);
    Matrix sing(2, 2, 30);
    sing(0, 0) = Real(1L, 30);
    sing(0, 1) = Real(2L, 30);
    sing(1, 0) = Real(2L, 30);
    sing(1, 1) = Real(4L, 30);
    CHECK(determinant(sing).is_zero());
}

}  // TEST_SUITE
