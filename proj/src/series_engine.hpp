#pragma once

#include "choreo/taylor.hpp"
#include "fixed_series.hpp"

#include <span>
#include <vector>

namespace choreo::detail {

// Power-series workspace for the three-body equations and, optionally, a set
// of variational columns driven by the same base trajectory.
//
// Base recurrences per pair (d = r_j - r_i):
//   r2 = dx*dx + dy*dy,  u = r2^(-3/2),  a = d u  (body i gets +a, body j -a)
// Variational recurrences use the pair Hessian blocks
//   G = u I - 3 w d d^T,  w = r2^(-5/2),  delta a = G delta d.
class SeriesEngine {
public:
    SeriesEngine(int order, mpfr_prec_t bits, int columns);

    int order() const { return order_; }
    int columns() const { return columns_; }
    mpfr_prec_t bits() const { return bits_; }

    // Fills all series about `state`; `columns` must hold columns() vectors.
    void expand(const StateVector& state, std::span<const StateVector> columns, const Real& collision_r2);

    TaylorExpansion& expansion() { return base_; }
    const TaylorExpansion& expansion() const { return base_; }

    void evaluate(const Real& h, StateVector& out) const;
    void evaluate_column(int m, const Real& h, StateVector& out) const;

private:
    using Series = std::vector<Real>;

    // MPFR values plus the fixed-point mirror fed to the dot sums
    struct Mirrored {
        Series v;
        FixedSeries f;
        void set(int k) { f.set(k, v[static_cast<std::size_t>(k)].get()); }
    };

    struct PairSeries {
        Mirrored dx, dy, sqx, sqy, r2, u;
        Series ax, ay;
        // variational only
        Mirrored w, dxdy, gxx, gxy, gyy;
    };

    struct ColumnSeries {
        std::vector<StateVector> coeff;
        std::vector<Mirrored> ddx, ddy;  // per pair
    };

    void base_order(int k);
    void hessian_order(int k);
    void column_order(ColumnSeries& col, int k);

    // out[k] for out = base^alpha, alpha = -(c1 + 2)/2 with c1 = 1 or 3:
    // out[k] = -(1/(2 k base0)) sum_{j=1}^{k} (c1 j + 2k) base[j] out[k-j]
    void power_step(Mirrored& out, const Mirrored& base, int k, long c1);

    int order_;
    mpfr_prec_t bits_;
    int columns_;
    TaylorExpansion base_;
    std::vector<PairSeries> pairs_;
    std::vector<ColumnSeries> cols_;
    FixedDot dot_;
    Real tmp_, acc_, acc2_, part_;
};

Real natural_step(const TaylorExpansion& exp, double step_safety);

}  // namespace choreo::detail
