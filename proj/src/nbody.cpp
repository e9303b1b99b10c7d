#include "choreo/nbody.hpp"

#include "choreo/errors.hpp"

#include <algorithm>

namespace choreo {

namespace {

mpfr_prec_t max_bits(const StateVector& s) {
    mpfr_prec_t b = MPFR_PREC_MIN;
    for (const auto& x : s) b = std::max(b, x.bits());
    return b;
}

StateVector filled(mpfr_prec_t bits) {
    StateVector s;
    for (auto& x : s) x = Real(bits);
    return s;
}

}  // namespace

StateVector make_state(int digits) { return filled(bits_for_digits(digits)); }

StateVector state_at_digits(const StateVector& s, int digits) {
    StateVector out;
    for (std::size_t i = 0; i < kDim; ++i) out[i] = s[i].at_digits(digits);
    return out;
}

StateVector build_initial_state(const Real& vx, const Real& vy) {
    const mpfr_prec_t bits = std::max(vx.bits(), vy.bits());
    StateVector s = filled(bits);
    mpfr_set_si(s[pos_x(0)].get(), -1, MPFR_RNDN);
    mpfr_set_si(s[pos_x(1)].get(), 1, MPFR_RNDN);
    for (int b : {0, 1}) {
        mpfr_set(s[vel_x(b)].get(), vx.get(), MPFR_RNDN);
        mpfr_set(s[vel_y(b)].get(), vy.get(), MPFR_RNDN);
    }
    mpfr_mul_si(s[vel_x(2)].get(), vx.get(), -2, MPFR_RNDN);
    mpfr_mul_si(s[vel_y(2)].get(), vy.get(), -2, MPFR_RNDN);
    return s;
}

StateVector initial_state_derivative_vx(int digits) {
    StateVector s = make_state(digits);
    mpfr_set_si(s[vel_x(0)].get(), 1, MPFR_RNDN);
    mpfr_set_si(s[vel_x(1)].get(), 1, MPFR_RNDN);
    mpfr_set_si(s[vel_x(2)].get(), -2, MPFR_RNDN);
    return s;
}

StateVector initial_state_derivative_vy(int digits) {
    StateVector s = make_state(digits);
    mpfr_set_si(s[vel_y(0)].get(), 1, MPFR_RNDN);
    mpfr_set_si(s[vel_y(1)].get(), 1, MPFR_RNDN);
    mpfr_set_si(s[vel_y(2)].get(), -2, MPFR_RNDN);
    return s;
}

Real default_collision_threshold(int digits) { return pow10(-6, digits); }

StateVector rhs(const StateVector& s, const Real& collision_threshold) {
    const mpfr_prec_t bits = max_bits(s);
    StateVector out = filled(bits);
    for (int b = 0; b < 3; ++b) {
        mpfr_set(out[pos_x(b)].get(), s[vel_x(b)].get(), MPFR_RNDN);
        mpfr_set(out[pos_y(b)].get(), s[vel_y(b)].get(), MPFR_RNDN);
    }
    Real dx(bits), dy(bits), r2(bits), inv3(bits), t(bits);
    const Real thr2 = collision_threshold * collision_threshold;
    for (const auto& [i, j] : kPairs) {
        mpfr_sub(dx.get(), s[pos_x(j)].get(), s[pos_x(i)].get(), MPFR_RNDN);
        mpfr_sub(dy.get(), s[pos_y(j)].get(), s[pos_y(i)].get(), MPFR_RNDN);
        mpfr_sqr(r2.get(), dx.get(), MPFR_RNDN);
        mpfr_sqr(t.get(), dy.get(), MPFR_RNDN);
        mpfr_add(r2.get(), r2.get(), t.get(), MPFR_RNDN);
        if (r2 < thr2) throw CollisionError("bodies " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " collide");
        // r^-3 = (r2)^(-3/2)
        mpfr_rec_sqrt(inv3.get(), r2.get(), MPFR_RNDN);
        mpfr_div(inv3.get(), inv3.get(), r2.get(), MPFR_RNDN);
        mpfr_mul(t.get(), dx.get(), inv3.get(), MPFR_RNDN);
        mpfr_add(out[vel_x(i)].get(), out[vel_x(i)].get(), t.get(), MPFR_RNDN);
        mpfr_sub(out[vel_x(j)].get(), out[vel_x(j)].get(), t.get(), MPFR_RNDN);
        mpfr_mul(t.get(), dy.get(), inv3.get(), MPFR_RNDN);
        mpfr_add(out[vel_y(i)].get(), out[vel_y(i)].get(), t.get(), MPFR_RNDN);
        mpfr_sub(out[vel_y(j)].get(), out[vel_y(j)].get(), t.get(), MPFR_RNDN);
    }
    return out;
}

StateVector rhs(const StateVector& s) { return rhs(s, default_collision_threshold(s[0].digits())); }

Real kinetic_energy(const StateVector& s) {
    Real k(max_bits(s));
    for (int b = 0; b < 3; ++b) k += s[vel_x(b)] * s[vel_x(b)] + s[vel_y(b)] * s[vel_y(b)];
    return k / 2;
}

Real energy(const StateVector& s, const Real& collision_threshold) {
    Real e = kinetic_energy(s);
    for (const auto& [i, j] : kPairs) {
        Real r = hypot(s[pos_x(j)] - s[pos_x(i)], s[pos_y(j)] - s[pos_y(i)]);
        if (r < collision_threshold) throw CollisionError("coincident bodies in energy evaluation");
        Real one(1L, r.digits());
        e -= one / r;
    }
    return e;
}

Real energy(const StateVector& s) { return energy(s, default_collision_threshold(s[0].digits())); }

Real angular_momentum(const StateVector& s) {
    Real l(max_bits(s));
    for (int b = 0; b < 3; ++b) l += s[pos_x(b)] * s[vel_y(b)] - s[pos_y(b)] * s[vel_x(b)];
    return l;
}

std::array<Real, 2> linear_momentum(const StateVector& s) {
    const mpfr_prec_t bits = max_bits(s);
    Real px(bits), py(bits);
    for (int b = 0; b < 3; ++b) {
        px += s[vel_x(b)];
        py += s[vel_y(b)];
    }
    return {px, py};
}

ConservedQuantities conserved_quantities(const StateVector& s) {
    auto p = linear_momentum(s);
    return {energy(s), angular_momentum(s), p[0], p[1]};
}

Real initial_energy(const Real& vx, const Real& vy) {
    Real e = (vx * vx + vy * vy) * 3;
    Real half(5L, e.digits());
    half /= 2;
    return e - half;
}

Real scale_invariant_period(const Real& period, const Real& vx, const Real& vy) {
    Real e = abs(initial_energy(vx, vy));
    const int d = std::max(e.digits(), period.digits());
    if (e < pow10(-(d - kGuardDigits), d)) throw ZeroEnergy("scale-invariant period undefined at zero energy");
    Real e_prec = e.at_digits(d);
    return period.at_digits(d) * e_prec * sqrt(e_prec);
}

Real norm2(const StateVector& s) {
    Real acc(max_bits(s));
    for (const auto& x : s) acc += x * x;
    return sqrt(acc);
}

Real distance2(const StateVector& a, const StateVector& b) {
    Real acc(std::max(max_bits(a), max_bits(b)));
    for (std::size_t i = 0; i < kDim; ++i) {
        Real d = a[i] - b[i];
        acc += d * d;
    }
    return sqrt(acc);
}

}  // namespace choreo
