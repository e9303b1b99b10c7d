#pragma once

#include <gmp.h>
#include <mpfr.h>

#include <vector>

namespace choreo::detail {

// Mirror of an MPFR power series in limb-aligned fixed point, used for the
// Cauchy-product dot sums that dominate the Taylor recurrences.
//
// Coefficient j is sign_j * A_j * 2^(64 * shift_j) with A_j an (n+1)-limb
// integer. Because every exponent is a multiple of the limb size, products
// of two coefficients land on limb boundaries and the sum needs no bit
// shifts.
class FixedSeries {
public:
    FixedSeries() = default;
    FixedSeries(int length, mpfr_prec_t bits);

    void set(int k, mpfr_srcptr x);

    int limbs() const { return width_; }
    const mp_limb_t* digits(int k) const { return &limbs_[static_cast<std::size_t>(k) * width_]; }
    int sign(int k) const { return sign_[static_cast<std::size_t>(k)]; }
    long shift(int k) const { return shift_[static_cast<std::size_t>(k)]; }

private:
    int width_ = 0;   // n + 1
    int src_limbs_ = 0;
    std::vector<mp_limb_t> limbs_;
    std::vector<int> sign_;
    std::vector<long> shift_;
};

class FixedDot {
public:
    explicit FixedDot(mpfr_prec_t bits);

    // out = sum_{j=lo}^{k} a[j] b[k-j]
    void dot(mpfr_ptr out, const FixedSeries& a, const FixedSeries& b, int k, int lo = 0);
    // out = sum_{j=0}^{k} a[j] a[k-j]
    void square(mpfr_ptr out, const FixedSeries& a, int k);
    // out = sum_{j=lo}^{k} (c1 j + c0) a[j] b[k-j], weights must be positive
    void weighted(mpfr_ptr out, const FixedSeries& a, const FixedSeries& b, int k, long c1, long c0, int lo);

private:
    template <class Term>
    void accumulate(mpfr_ptr out, int lo, int hi, const FixedSeries& a, const FixedSeries& b, int k, Term weight);

    int width_;
    std::vector<mp_limb_t> acc_;
    std::vector<mp_limb_t> prod_;
};

}  // namespace choreo::detail
