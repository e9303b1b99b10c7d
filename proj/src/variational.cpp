#include "choreo/variational.hpp"

#include "choreo/errors.hpp"

namespace choreo {

Matrix jacobian(const StateVector& s, const Real& collision_threshold) {
    const int digits = s[0].digits();
    Matrix j(kDim, kDim, digits);
    for (std::size_t i = 0; i < 6; ++i) mpfr_set_ui(j(i, 6 + i).get(), 1, MPFR_RNDN);
    const Real thr2 = collision_threshold * collision_threshold;
    for (const auto& [a, b] : kPairs) {
        const Real dx = s[pos_x(b)] - s[pos_x(a)];
        const Real dy = s[pos_y(b)] - s[pos_y(a)];
        const Real r2 = dx * dx + dy * dy;
        if (r2 < thr2) throw CollisionError("collision in Jacobian evaluation");
        const Real u = Real(1L, digits) / (r2 * sqrt(r2));
        const Real w = u / r2;
        // dA/dd for A = d r^-3 (the force on body a from body b)
        const Real gxx = u - 3L * w * dx * dx;
        const Real gyy = u - 3L * w * dy * dy;
        const Real gxy = -3L * w * dx * dy;
        const std::size_t ax = vel_x(a), ay = vel_y(a), bx = vel_x(b), by = vel_y(b);
        const std::size_t px[2] = {pos_x(a), pos_x(b)};
        const std::size_t py[2] = {pos_y(a), pos_y(b)};
        // d = r_b - r_a, so dd/dr_b = +1 and dd/dr_a = -1
        for (int side = 0; side < 2; ++side) {
            const long sgn = side == 0 ? -1 : 1;
            j(ax, px[side]) += sgn * gxx;
            j(ax, py[side]) += sgn * gxy;
            j(ay, px[side]) += sgn * gxy;
            j(ay, py[side]) += sgn * gyy;
            j(bx, px[side]) -= sgn * gxx;
            j(bx, py[side]) -= sgn * gxy;
            j(by, px[side]) -= sgn * gxy;
            j(by, py[side]) -= sgn * gyy;
        }
    }
    return j;
}

Matrix jacobian(const StateVector& s) { return jacobian(s, default_collision_threshold(s[0].digits())); }

SensitivityState integrate_linearized(const StateVector& state, const std::vector<StateVector>& columns,
                                      const Real& t_target, const IntegratorConfig& cfg,
                                      const StepObserver& observer) {
    TaylorPropagator prop(cfg, static_cast<int>(columns.size()));
    auto res = prop.propagate(state, columns, t_target, observer);
    return SensitivityState{std::move(res.state), std::move(res.columns), res.steps};
}

SensitivityState integrate_param_sensitivities(const Real& vx, const Real& vy, const Real& t_target,
                                               const IntegratorConfig& cfg) {
    const StateVector x0 = state_at_digits(build_initial_state(vx, vy), cfg.digits);
    std::vector<StateVector> cols{initial_state_derivative_vx(cfg.digits), initial_state_derivative_vy(cfg.digits)};
    return integrate_linearized(x0, cols, t_target, cfg);
}

Matrix columns_to_matrix(const std::vector<StateVector>& columns) {
    const int digits = columns.empty() ? 16 : columns[0][0].digits();
    Matrix m(kDim, columns.size(), digits);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (std::size_t r = 0; r < kDim; ++r) m(r, c) = columns[c][r];
    }
    return m;
}

namespace {

std::vector<StateVector> identity_columns(int digits) {
    std::vector<StateVector> cols(kDim, make_state(digits));
    for (std::size_t c = 0; c < kDim; ++c) mpfr_set_ui(cols[c][c].get(), 1, MPFR_RNDN);
    return cols;
}

}  // namespace

Matrix integrate_monodromy_to(const StateVector& state, const Real& t_target, const IntegratorConfig& cfg) {
    auto res = integrate_linearized(state, identity_columns(cfg.digits), t_target, cfg);
    return columns_to_matrix(res.columns);
}

MonodromyResult integrate_monodromy(const SearchTriplet& solution, const IntegratorConfig& cfg,
                                    const Real& residual_tolerance) {
    const StateVector x0 = state_at_digits(build_initial_state(solution.vx, solution.vy), cfg.digits);
    auto res = integrate_linearized(x0, identity_columns(cfg.digits), solution.period, cfg);
    MonodromyResult out{columns_to_matrix(res.columns), distance2(res.base, x0), res.steps};
    if (out.residual > residual_tolerance) {
        throw NotPeriodic("periodicity residual " + out.residual.to_string(3) + " exceeds " +
                          residual_tolerance.to_string(3));
    }
    return out;
}

}  // namespace choreo
