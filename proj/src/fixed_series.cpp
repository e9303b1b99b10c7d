#include "fixed_series.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace choreo::detail {

namespace {

constexpr long kLimbBits = GMP_NUMB_BITS;

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

int limb_count(mpfr_prec_t bits) { return static_cast<int>((bits + kLimbBits - 1) / kLimbBits); }

}  // namespace

FixedSeries::FixedSeries(int length, mpfr_prec_t bits)
    : width_(limb_count(bits) + 1), src_limbs_(limb_count(bits)),
      limbs_(static_cast<std::size_t>(length) * static_cast<std::size_t>(width_), 0),
      sign_(static_cast<std::size_t>(length), 0), shift_(static_cast<std::size_t>(length), 0) {}

void FixedSeries::set(int k, mpfr_srcptr x) {
    const auto idx = static_cast<std::size_t>(k);
    if (mpfr_zero_p(x)) {
        sign_[idx] = 0;
        return;
    }
    if (!mpfr_number_p(x)) throw std::domain_error("non-finite Taylor coefficient");
    const int n = limb_count(mpfr_get_prec(x));
    if (n != src_limbs_) throw std::logic_error("fixed-point mirror precision mismatch");
    const auto* m = static_cast<const mp_limb_t*>(mpfr_custom_get_significand(x));
    // x = M * 2^(e - 64 n) with M the n-limb significand
    const long q = static_cast<long>(mpfr_get_exp(x)) - kLimbBits * n;
    const long f = floor_div(q, kLimbBits);
    const unsigned s = static_cast<unsigned>(q - kLimbBits * f);
    mp_limb_t* a = &limbs_[idx * static_cast<std::size_t>(width_)];
    if (s == 0) {
        std::memcpy(a, m, sizeof(mp_limb_t) * static_cast<std::size_t>(n));
        a[n] = 0;
    } else {
        a[n] = mpn_lshift(a, m, n, s);
    }
    sign_[idx] = mpfr_sgn(x) > 0 ? 1 : -1;
    shift_[idx] = f;
}

FixedDot::FixedDot(mpfr_prec_t bits)
    : width_(limb_count(bits) + 1), acc_(static_cast<std::size_t>(2 * width_ + 2)),
      prod_(static_cast<std::size_t>(2 * width_)) {}

template <class Term>
void FixedDot::accumulate(mpfr_ptr out, int lo, int hi, const FixedSeries& a, const FixedSeries& b, int k,
                          Term weight) {
    long gmax = std::numeric_limits<long>::min();
    for (int j = lo; j <= hi; ++j) {
        if (a.sign(j) == 0 || b.sign(k - j) == 0) continue;
        gmax = std::max(gmax, a.shift(j) + b.shift(k - j));
    }
    if (gmax == std::numeric_limits<long>::min()) {
        mpfr_set_zero(out, 1);
        return;
    }
    const int w = width_;
    const long span = 2L * w;
    const long window = span + 2;
    // limbs [bottom, bottom + window); the top limb is headroom and sign
    const long bottom = gmax - 1;
    mp_limb_t* acc = acc_.data();
    mp_limb_t* prod = prod_.data();
    std::fill(acc_.begin(), acc_.end(), 0);

    for (int j = lo; j <= hi; ++j) {
        const int sa = a.sign(j);
        const int sb = b.sign(k - j);
        if (sa == 0 || sb == 0) continue;
        long off = a.shift(j) + b.shift(k - j) - bottom;
        const mp_limb_t* src = prod;
        long len = span;
        if (off < 0) {
            if (-off >= span) continue;
            src = prod - off;
            len = span + off;
            off = 0;
        }
        mpn_mul_n(prod, a.digits(j), b.digits(k - j), w);
        const unsigned long wt = weight(j);
        mp_limb_t* dst = acc + off;
        const long room = window - off;
        if (wt == 1) {
            if (sa == sb) {
                mpn_add(dst, dst, room, src, len);
            } else {
                mpn_sub(dst, dst, room, src, len);
            }
        } else if (sa == sb) {
            mp_limb_t cy = mpn_addmul_1(dst, src, len, wt);
            if (room > len) mpn_add_1(dst + len, dst + len, room - len, cy);
        } else {
            mp_limb_t bw = mpn_submul_1(dst, src, len, wt);
            if (room > len) mpn_sub_1(dst + len, dst + len, room - len, bw);
        }
    }

    const bool negative = (acc[window - 1] >> (kLimbBits - 1)) != 0;
    if (negative) mpn_neg(acc, acc, window);
    long size = window;
    while (size > 0 && acc[size - 1] == 0) --size;
    mpz_t z;
    mpz_roinit_n(z, acc, negative ? -size : size);
    mpfr_set_z_2exp(out, z, static_cast<mpfr_exp_t>(bottom * kLimbBits), MPFR_RNDN);
}

void FixedDot::dot(mpfr_ptr out, const FixedSeries& a, const FixedSeries& b, int k, int lo) {
    accumulate(out, lo, k, a, b, k, [](int) { return 1UL; });
}

void FixedDot::square(mpfr_ptr out, const FixedSeries& a, int k) {
    accumulate(out, 0, k / 2, a, a, k, [k](int j) { return 2 * j == k ? 1UL : 2UL; });
}

void FixedDot::weighted(mpfr_ptr out, const FixedSeries& a, const FixedSeries& b, int k, long c1, long c0, int lo) {
    accumulate(out, lo, k, a, b, k, [c1, c0](int j) { return static_cast<unsigned long>(c1 * j + c0); });
}

}  // namespace choreo::detail
