#include "fixed_series.hpp"

#include "choreo/real.hpp"

#include "doctest.h"

#include <random>

using namespace choreo;
using choreo::detail::FixedDot;
using choreo::detail::FixedSeries;

namespace {

// Exact reference: every product and sum at a precision far beyond the inputs.
Real exact_dot(const std::vector<Real>& a, const std::vector<Real>& b, int k, int lo, long c1, long c0) {
    Real acc(bits_for_digits(2000));
    for (int j = lo; j <= k; ++j) {
        Real t = a[j].at_digits(2000) * b[k - j].at_digits(2000);
        acc += t * (c1 * j + c0);
    }
    return acc;
}

std::vector<Real> random_series(std::mt19937_64& rng, int n, int digits, int exp_spread) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> e(-exp_spread, exp_spread);
    std::vector<Real> s;
    for (int j = 0; j < n; ++j) {
        Real x(u(rng), digits);
        x += Real(u(rng), digits) / 1000003L;
        s.push_back(x * pow10(e(rng), digits));
    }
    return s;
}

FixedSeries mirror(const std::vector<Real>& s, mpfr_prec_t bits) {
    FixedSeries f(static_cast<int>(s.size()), bits);
    for (std::size_t j = 0; j < s.size(); ++j) f.set(static_cast<int>(j), s[j].get());
    return f;
}

}  // namespace

TEST_SUITE("taylor_integrator") {

TEST_CASE("fixed-point Cauchy products match exact sums to working precision") {
    std::mt19937_64 rng(3);
    for (int digits : {32, 64, 134, 250}) {
        const mpfr_prec_t bits = bits_for_digits(digits);
        for (int spread : {0, 8, 40}) {
            const int n = 30;
            const auto a = random_series(rng, n, digits, spread);
            const auto b = random_series(rng, n, digits, spread);
            const FixedSeries fa = mirror(a, bits), fb = mirror(b, bits);
            FixedDot dot(bits);
            for (int k : {0, 1, 7, n - 1}) {
                Real out(bits);
                dot.dot(out.get(), fa, fb, k);
                const Real ref = exact_dot(a, b, k, 0, 0, 1);
                // error relative to the largest term, not the (possibly cancelled) sum
                Real scale(bits);
                for (int j = 0; j <= k; ++j) scale = max(scale, abs(a[j] * b[k - j]));
                CHECK(abs(out - ref) <= scale * pow10(-(digits - 2), digits));

                dot.weighted(out.get(), fa, fb, k, 3, 2 * k, 1);
                const Real wref = exact_dot(a, b, k, 1, 3, 2 * k);
                CHECK(abs(out - wref) <= scale * (5L * k + 1) * pow10(-(digits - 2), digits));

                dot.square(out.get(), fa, k);
                const Real sref = exact_dot(a, a, k, 0, 0, 1);
                Real sscale(bits);
                for (int j = 0; j <= k; ++j) sscale = max(sscale, abs(a[j] * a[k - j]));
                CHECK(abs(out - sref) <= sscale * pow10(-(digits - 2), digits));
            }
        }
    }
}

TEST_CASE("fixed-point mirror handles zero coefficients") {
    const mpfr_prec_t bits = bits_for_digits(64);
    std::vector<Real> a{Real(0L, 64), Real("1.5", 64), Real(0L, 64)};
    std::vector<Real> b{Real("2", 64), Real(0L, 64), Real("-4", 64)};
    const FixedSeries fa = mirror(a, bits), fb = mirror(b, bits);
    FixedDot dot(bits);
    Real out(bits);
    dot.dot(out.get(), fa, fb, 2);
    CHECK(out.is_zero());
    dot.dot(out.get(), fa, fb, 1);
    CHECK(out == 3L);
}

}  // TEST_SUITE
