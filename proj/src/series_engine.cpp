#include "series_engine.hpp"

#include "choreo/errors.hpp"

#include <cmath>

namespace choreo::detail {

namespace {

std::vector<Real> make_series(int n, mpfr_prec_t bits) {
    std::vector<Real> s;
    s.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s.emplace_back(bits);
    return s;
}

StateVector make_vec(mpfr_prec_t bits) {
    StateVector v;
    for (auto& x : v) x = Real(bits);
    return v;
}

}  // namespace

SeriesEngine::SeriesEngine(int order, mpfr_prec_t bits, int columns)
    : order_(order), bits_(bits), columns_(columns), dot_(bits), tmp_(bits), acc_(bits), acc2_(bits),
      part_(bits) {
    const int n = order + 1;
    auto mirrored = [&](Mirrored& m) {
        m.v = make_series(n, bits);
        m.f = FixedSeries(n, bits);
    };
    base_.coefficients.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) base_.coefficients.push_back(make_vec(bits));
    base_.step = Real(bits);
    pairs_.resize(3);
    for (auto& p : pairs_) {
        for (Mirrored* m : {&p.dx, &p.dy, &p.sqx, &p.sqy, &p.r2, &p.u}) mirrored(*m);
        p.ax = make_series(n, bits);
        p.ay = make_series(n, bits);
        if (columns > 0) {
            for (Mirrored* m : {&p.w, &p.dxdy, &p.gxx, &p.gxy, &p.gyy}) mirrored(*m);
        }
    }
    cols_.resize(static_cast<std::size_t>(columns));
    for (auto& c : cols_) {
        c.coeff.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) c.coeff.push_back(make_vec(bits));
        c.ddx.resize(3);
        c.ddy.resize(3);
        for (int p = 0; p < 3; ++p) {
            mirrored(c.ddx[p]);
            mirrored(c.ddy[p]);
        }
    }
}

void SeriesEngine::power_step(Mirrored& out, const Mirrored& base, int k, long c1) {
    mpfr_ptr acc = acc2_.get();
    dot_.weighted(acc, base.f, out.f, k, c1, 2L * k, 1);
    mpfr_div_si(acc, acc, -2L * k, MPFR_RNDN);
    mpfr_div(out.v[k].get(), acc, base.v[0].get(), MPFR_RNDN);
    out.set(k);
}

void SeriesEngine::base_order(int k) {
    auto& c = base_.coefficients;
    for (std::size_t p = 0; p < 3; ++p) {
        const auto [i, j] = kPairs[p];
        PairSeries& ps = pairs_[p];
        mpfr_sub(ps.dx.v[k].get(), c[k][pos_x(j)].get(), c[k][pos_x(i)].get(), MPFR_RNDN);
        mpfr_sub(ps.dy.v[k].get(), c[k][pos_y(j)].get(), c[k][pos_y(i)].get(), MPFR_RNDN);
        ps.dx.set(k);
        ps.dy.set(k);
        dot_.square(ps.sqx.v[k].get(), ps.dx.f, k);
        dot_.square(ps.sqy.v[k].get(), ps.dy.f, k);
        ps.sqx.set(k);
        ps.sqy.set(k);
        mpfr_add(ps.r2.v[k].get(), ps.sqx.v[k].get(), ps.sqy.v[k].get(), MPFR_RNDN);
        ps.r2.set(k);
        if (k == 0) {
            mpfr_rec_sqrt(ps.u.v[0].get(), ps.r2.v[0].get(), MPFR_RNDN);
            mpfr_div(ps.u.v[0].get(), ps.u.v[0].get(), ps.r2.v[0].get(), MPFR_RNDN);
            ps.u.set(0);
        } else {
            power_step(ps.u, ps.r2, k, 1);
        }
        dot_.dot(ps.ax[k].get(), ps.dx.f, ps.u.f, k);
        dot_.dot(ps.ay[k].get(), ps.dy.f, ps.u.f, k);
    }
    const long div = k + 1;
    for (int b = 0; b < 3; ++b) {
        mpfr_div_si(c[k + 1][pos_x(b)].get(), c[k][vel_x(b)].get(), div, MPFR_RNDN);
        mpfr_div_si(c[k + 1][pos_y(b)].get(), c[k][vel_y(b)].get(), div, MPFR_RNDN);
        mpfr_set_zero(c[k + 1][vel_x(b)].get(), 1);
        mpfr_set_zero(c[k + 1][vel_y(b)].get(), 1);
    }
    for (std::size_t p = 0; p < 3; ++p) {
        const auto [i, j] = kPairs[p];
        const PairSeries& ps = pairs_[p];
        mpfr_add(c[k + 1][vel_x(i)].get(), c[k + 1][vel_x(i)].get(), ps.ax[k].get(), MPFR_RNDN);
        mpfr_add(c[k + 1][vel_y(i)].get(), c[k + 1][vel_y(i)].get(), ps.ay[k].get(), MPFR_RNDN);
        mpfr_sub(c[k + 1][vel_x(j)].get(), c[k + 1][vel_x(j)].get(), ps.ax[k].get(), MPFR_RNDN);
        mpfr_sub(c[k + 1][vel_y(j)].get(), c[k + 1][vel_y(j)].get(), ps.ay[k].get(), MPFR_RNDN);
    }
    for (int b = 0; b < 3; ++b) {
        mpfr_div_si(c[k + 1][vel_x(b)].get(), c[k + 1][vel_x(b)].get(), div, MPFR_RNDN);
        mpfr_div_si(c[k + 1][vel_y(b)].get(), c[k + 1][vel_y(b)].get(), div, MPFR_RNDN);
    }
}

void SeriesEngine::hessian_order(int k) {
    mpfr_ptr acc = acc_.get();
    for (auto& ps : pairs_) {
        if (k == 0) {
            mpfr_div(ps.w.v[0].get(), ps.u.v[0].get(), ps.r2.v[0].get(), MPFR_RNDN);
            ps.w.set(0);
        } else {
            power_step(ps.w, ps.r2, k, 3);
        }
        dot_.dot(ps.dxdy.v[k].get(), ps.dx.f, ps.dy.f, k);
        ps.dxdy.set(k);
        dot_.dot(acc, ps.w.f, ps.sqx.f, k);
        mpfr_mul_si(acc, acc, -3, MPFR_RNDN);
        mpfr_add(ps.gxx.v[k].get(), acc, ps.u.v[k].get(), MPFR_RNDN);
        dot_.dot(acc, ps.w.f, ps.sqy.f, k);
        mpfr_mul_si(acc, acc, -3, MPFR_RNDN);
        mpfr_add(ps.gyy.v[k].get(), acc, ps.u.v[k].get(), MPFR_RNDN);
        dot_.dot(acc, ps.w.f, ps.dxdy.f, k);
        mpfr_mul_si(ps.gxy.v[k].get(), acc, -3, MPFR_RNDN);
        ps.gxx.set(k);
        ps.gyy.set(k);
        ps.gxy.set(k);
    }
}

void SeriesEngine::column_order(ColumnSeries& col, int k) {
    auto& c = col.coeff;
    const long div = k + 1;
    for (int b = 0; b < 3; ++b) {
        mpfr_div_si(c[k + 1][pos_x(b)].get(), c[k][vel_x(b)].get(), div, MPFR_RNDN);
        mpfr_div_si(c[k + 1][pos_y(b)].get(), c[k][vel_y(b)].get(), div, MPFR_RNDN);
        mpfr_set_zero(c[k + 1][vel_x(b)].get(), 1);
        mpfr_set_zero(c[k + 1][vel_y(b)].get(), 1);
    }
    mpfr_ptr bx = acc_.get();
    mpfr_ptr by = acc2_.get();
    mpfr_ptr part = part_.get();
    for (std::size_t p = 0; p < 3; ++p) {
        const auto [i, j] = kPairs[p];
        const PairSeries& ps = pairs_[p];
        Mirrored& ddx = col.ddx[p];
        Mirrored& ddy = col.ddy[p];
        mpfr_sub(ddx.v[k].get(), c[k][pos_x(j)].get(), c[k][pos_x(i)].get(), MPFR_RNDN);
        mpfr_sub(ddy.v[k].get(), c[k][pos_y(j)].get(), c[k][pos_y(i)].get(), MPFR_RNDN);
        ddx.set(k);
        ddy.set(k);
        dot_.dot(bx, ps.gxx.f, ddx.f, k);
        dot_.dot(part, ps.gxy.f, ddy.f, k);
        mpfr_add(bx, bx, part, MPFR_RNDN);
        dot_.dot(by, ps.gxy.f, ddx.f, k);
        dot_.dot(part, ps.gyy.f, ddy.f, k);
        mpfr_add(by, by, part, MPFR_RNDN);
        mpfr_add(c[k + 1][vel_x(i)].get(), c[k + 1][vel_x(i)].get(), bx, MPFR_RNDN);
        mpfr_add(c[k + 1][vel_y(i)].get(), c[k + 1][vel_y(i)].get(), by, MPFR_RNDN);
        mpfr_sub(c[k + 1][vel_x(j)].get(), c[k + 1][vel_x(j)].get(), bx, MPFR_RNDN);
        mpfr_sub(c[k + 1][vel_y(j)].get(), c[k + 1][vel_y(j)].get(), by, MPFR_RNDN);
    }
    for (int b = 0; b < 3; ++b) {
        mpfr_div_si(c[k + 1][vel_x(b)].get(), c[k + 1][vel_x(b)].get(), div, MPFR_RNDN);
        mpfr_div_si(c[k + 1][vel_y(b)].get(), c[k + 1][vel_y(b)].get(), div, MPFR_RNDN);
    }
}

void SeriesEngine::expand(const StateVector& state, std::span<const StateVector> columns, const Real& collision_r2) {
    auto& c = base_.coefficients;
    for (std::size_t i = 0; i < kDim; ++i) mpfr_set(c[0][i].get(), state[i].get(), MPFR_RNDN);
    for (int k = 0; k < order_; ++k) {
        base_order(k);
        if (k == 0) {
            for (std::size_t p = 0; p < 3; ++p) {
                if (pairs_[p].r2.v[0] < collision_r2) {
                    const auto [i, j] = kPairs[p];
                    throw CollisionError("bodies " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                         " closer than the collision threshold");
                }
            }
        }
    }
    if (columns_ == 0) return;
    if (static_cast<int>(columns.size()) != columns_) throw PreconditionError("column count mismatch");
    for (int k = 0; k < order_; ++k) hessian_order(k);
    for (int m = 0; m < columns_; ++m) {
        ColumnSeries& col = cols_[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < kDim; ++i) mpfr_set(col.coeff[0][i].get(), columns[m][i].get(), MPFR_RNDN);
        for (int k = 0; k < order_; ++k) column_order(col, k);
    }
}

namespace {

void horner(const std::vector<StateVector>& coeff, const Real& h, StateVector& out, mpfr_ptr tmp) {
    const int order = static_cast<int>(coeff.size()) - 1;
    for (std::size_t i = 0; i < kDim; ++i) {
        mpfr_set(tmp, coeff[order][i].get(), MPFR_RNDN);
        for (int k = order - 1; k >= 0; --k) {
            mpfr_mul(tmp, tmp, h.get(), MPFR_RNDN);
            mpfr_add(tmp, tmp, coeff[k][i].get(), MPFR_RNDN);
        }
        if (out[i].bits() != mpfr_get_prec(tmp)) out[i] = Real(mpfr_get_prec(tmp));
        mpfr_set(out[i].get(), tmp, MPFR_RNDN);
    }
}

}  // namespace

void SeriesEngine::evaluate(const Real& h, StateVector& out) const {
    Real tmp(bits_);
    horner(base_.coefficients, h, out, tmp.get());
}

void SeriesEngine::evaluate_column(int m, const Real& h, StateVector& out) const {
    Real tmp(bits_);
    horner(cols_[static_cast<std::size_t>(m)].coeff, h, out, tmp.get());
}

Real natural_step(const TaylorExpansion& series, double step_safety) {
    const int order = series.order();
    if (order < 2) throw PreconditionError("stepsize control needs order >= 2");
    const mpfr_prec_t bits = series.coefficients[0][0].bits();
    Real n1(bits), n2(bits);
    for (std::size_t i = 0; i < kDim; ++i) {
        if (mpfr_cmpabs(series.coefficients[order - 1][i].get(), n1.get()) > 0) mpfr_abs(n1.get(), series.coefficients[order - 1][i].get(), MPFR_RNDN);
        if (mpfr_cmpabs(series.coefficients[order][i].get(), n2.get()) > 0) mpfr_abs(n2.get(), series.coefficients[order][i].get(), MPFR_RNDN);
    }
    if (n1.is_zero() && n2.is_zero()) throw DegenerateSeries("top Taylor coefficients vanish");
    // rho_n = (1/n)^(1/n_order) = exp(-log(n)/n_order)
    auto radius = [](const Real& n, long ord) {
        Real l = log(n);
        l /= -ord;
        return exp(l);
    };
    Real h(bits);
    if (n1.is_zero()) {
        h = radius(n2, order);
    } else if (n2.is_zero()) {
        h = radius(n1, order - 1);
    } else {
        h = min(radius(n1, order - 1), radius(n2, order));
    }
    mpfr_mul_d(h.get(), h.get(), step_safety, MPFR_RNDN);
    return h;
}

}  // namespace choreo::detail
