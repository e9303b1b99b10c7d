#pragma once

#include <mpfr.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace choreo {

/// Binary precision needed to hold `digits` decimal digits.
mpfr_prec_t bits_for_digits(int digits);
/// Decimal digits representable in `bits` binary digits (rounded down).
int digits_for_bits(mpfr_prec_t bits);

/// Arbitrary-precision real backed by an MPFR value.
///
/// Every value carries its own precision. A binary operation produces a
/// result at the larger of the two operand precisions; compound assignment
/// widens the left operand when the right one is more precise. Rounding is
/// always to nearest.
class Real {
public:
    Real();
    explicit Real(mpfr_prec_t bits);
    Real(double v, int digits);
    Real(long v, int digits);
    Real(int v, int digits) : Real(static_cast<long>(v), digits) {}
    Real(std::string_view decimal, int digits);

    Real(const Real& other);
    Real(Real&& other) noexcept;
    Real& operator=(const Real& other);
    Real& operator=(Real&& other) noexcept;
    ~Real();

    /// Thread-local default precision used by `Real()`.
    static int default_digits();
    static void set_default_digits(int digits);

    static Real with_bits(double v, mpfr_prec_t bits);
    static Real pi(int digits);

    mpfr_ptr get() { return value_; }
    mpfr_srcptr get() const { return value_; }

    mpfr_prec_t bits() const { return mpfr_get_prec(value_); }
    int digits() const { return digits_for_bits(bits()); }

    /// Returns a copy rounded (or exactly extended) to `digits`.
    Real at_digits(int digits) const;
    /// Changes this value's precision in place, rounding to nearest.
    void set_digits(int digits);

    bool is_zero() const { return mpfr_zero_p(value_) != 0; }
    bool is_finite() const { return mpfr_number_p(value_) != 0; }
    int sign() const { return mpfr_sgn(value_); }
    double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
    long exponent10() const;

    /// Scientific decimal string with `sig_digits` significant digits.
    std::string to_string(int sig_digits) const;
    /// Same digits in positional notation, e.g. "521.3353" or "0.000125".
    std::string to_fixed_string(int sig_digits) const;
    /// Shortest scientific decimal string that parses back bit-exactly at
    /// this value's precision.
    std::string to_exact_string() const;

    Real& operator+=(const Real& o);
    Real& operator-=(const Real& o);
    Real& operator*=(const Real& o);
    Real& operator/=(const Real& o);
    Real& operator*=(long o);
    Real& operator/=(long o);

    Real operator-() const;

    friend Real operator+(const Real& a, const Real& b);
    friend Real operator-(const Real& a, const Real& b);
    friend Real operator*(const Real& a, const Real& b);
    friend Real operator/(const Real& a, const Real& b);
    friend Real operator*(const Real& a, long b);
    friend Real operator*(long a, const Real& b);
    friend Real operator/(const Real& a, long b);
    friend Real operator+(const Real& a, long b);
    friend Real operator-(const Real& a, long b);
    friend Real operator-(long a, const Real& b);

    friend bool operator==(const Real& a, const Real& b);
    friend std::partial_ordering operator<=>(const Real& a, const Real& b);
    friend bool operator==(const Real& a, long b);
    friend std::partial_ordering operator<=>(const Real& a, long b);
    // mixing with a double would silently truncate it to long
    template <std::floating_point F>
    friend Real operator+(const Real&, F) = delete;
    template <std::floating_point F>
    friend Real operator-(const Real&, F) = delete;
    template <std::floating_point F>
    friend Real operator*(const Real&, F) = delete;
    template <std::floating_point F>
    friend Real operator*(F, const Real&) = delete;
    template <std::floating_point F>
    friend Real operator/(const Real&, F) = delete;
    template <std::floating_point F>
    Real& operator*=(F) = delete;
    template <std::floating_point F>
    Real& operator/=(F) = delete;
    template <std::floating_point F>
    friend bool operator==(const Real&, F) = delete;
    template <std::floating_point F>
    friend std::partial_ordering operator<=>(const Real&, F) = delete;

private:
    mpfr_t value_;
    void widen_to(mpfr_prec_t bits);
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real cbrt(const Real& x);
Real exp(const Real& x);
Real log(const Real& x);
Real log10(const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, long n);
Real sin(const Real& x);
Real cos(const Real& x);
Real atan2(const Real& y, const Real& x);
Real hypot(const Real& x, const Real& y);
Real min(const Real& a, const Real& b);
Real max(const Real& a, const Real& b);
/// 10^n at the given precision.
Real pow10(long n, int digits);

/// Number of leading significant decimal digits on which `a` and `b` agree,
/// measured as floor(-log10(|a-b| / |b|)); capped at `cap` when equal.
int matching_digits(const Real& a, const Real& b, int cap = 100000);

std::ostream& operator<<(std::ostream& os, const Real& x);

}  // namespace choreo
