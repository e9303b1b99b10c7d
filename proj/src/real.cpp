#include "choreo/real.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace choreo {

namespace {

thread_local int g_default_digits = 32;

// log2(10)
constexpr double kLog2Of10 = 3.321928094887362347870319429489390175864831393;

std::string format_scientific(mpfr_srcptr v, std::size_t n) {
    if (mpfr_nan_p(v)) return "nan";
    if (mpfr_inf_p(v)) return mpfr_sgn(v) > 0 ? "inf" : "-inf";
    if (mpfr_zero_p(v)) return "0";
    mpfr_exp_t e = 0;
    char* raw = mpfr_get_str(nullptr, &e, 10, n, v, MPFR_RNDN);
    std::string digits(raw);
    mpfr_free_str(raw);
    std::string out;
    if (!digits.empty() && digits.front() == '-') {
        out.push_back('-');
        digits.erase(digits.begin());
    }
    // trailing zeros carry no information
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    out.push_back(digits.front());
    if (digits.size() > 1) {
        out.push_back('.');
        out.append(digits, 1, std::string::npos);
    }
    out.push_back('e');
    out += std::to_string(static_cast<long>(e) - 1);
    return out;
}

std::string format_positional(mpfr_srcptr v, std::size_t n) {
    if (mpfr_nan_p(v) || mpfr_inf_p(v) || mpfr_zero_p(v)) return format_scientific(v, n);
    mpfr_exp_t e = 0;
    char* raw = mpfr_get_str(nullptr, &e, 10, n, v, MPFR_RNDN);
    std::string digits(raw);
    mpfr_free_str(raw);
    std::string out;
    if (digits.front() == '-') {
        out.push_back('-');
        digits.erase(digits.begin());
    }
    // value = 0.digits * 10^e
    if (e <= 0) {
        digits.insert(0, static_cast<std::size_t>(-e), '0');
        digits.insert(0, "0.");
    } else if (static_cast<std::size_t>(e) >= digits.size()) {
        digits.append(static_cast<std::size_t>(e) - digits.size(), '0');
    } else {
        digits.insert(static_cast<std::size_t>(e), ".");
    }
    if (digits.find('.') != std::string::npos) {
        while (digits.back() == '0') digits.pop_back();
        if (digits.back() == '.') digits.pop_back();
    }
    return out + digits;
}

}  // namespace

mpfr_prec_t bits_for_digits(int digits) {
    if (digits < 1) throw std::invalid_argument("precision must be positive");
    return static_cast<mpfr_prec_t>(std::ceil(digits * kLog2Of10));
}

int digits_for_bits(mpfr_prec_t bits) {
    return static_cast<int>(std::floor(static_cast<double>(bits) / kLog2Of10 + 1e-9));
}

Real::Real() { mpfr_init2(value_, bits_for_digits(g_default_digits)); mpfr_set_zero(value_, 1); }

Real::Real(mpfr_prec_t bits) {
    mpfr_init2(value_, bits);
    mpfr_set_zero(value_, 1);
}

Real::Real(double v, int digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    mpfr_set_d(value_, v, MPFR_RNDN);
}

Real::Real(long v, int digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    mpfr_set_si(value_, v, MPFR_RNDN);
}

Real::Real(std::string_view decimal, int digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    std::string s(decimal);
    if (mpfr_set_str(value_, s.c_str(), 10, MPFR_RNDN) != 0) {
        mpfr_clear(value_);
        throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
}

Real::Real(const Real& other) {
    mpfr_init2(value_, other.bits());
    mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
    // steal the limbs; leave `other` as a valid minimal-precision zero
    value_[0] = other.value_[0];
    mpfr_init2(other.value_, MPFR_PREC_MIN);
    mpfr_set_zero(other.value_, 1);
}

Real& Real::operator=(const Real& other) {
    if (this != &other) {
        if (bits() != other.bits()) mpfr_set_prec(value_, other.bits());
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    return *this;
}

Real& Real::operator=(Real&& other) noexcept {
    if (this != &other) mpfr_swap(value_, other.value_);
    return *this;
}

Real::~Real() { mpfr_clear(value_); }

int Real::default_digits() { return g_default_digits; }
void Real::set_default_digits(int digits) {
    if (digits < 1) throw std::invalid_argument("precision must be positive");
    g_default_digits = digits;
}

Real Real::with_bits(double v, mpfr_prec_t bits) {
    Real r(bits);
    mpfr_set_d(r.value_, v, MPFR_RNDN);
    return r;
}

Real Real::pi(int digits) {
    Real r(bits_for_digits(digits));
    mpfr_const_pi(r.value_, MPFR_RNDN);
    return r;
}

Real Real::at_digits(int digits) const {
    Real r(bits_for_digits(digits));
    mpfr_set(r.value_, value_, MPFR_RNDN);
    return r;
}

void Real::set_digits(int digits) { mpfr_prec_round(value_, bits_for_digits(digits), MPFR_RNDN); }

long Real::exponent10() const {
    if (!is_finite() || is_zero()) return 0;
    Real a = abs(*this);
    mpfr_log10(a.value_, a.value_, MPFR_RNDN);
    mpfr_floor(a.value_, a.value_);
    return mpfr_get_si(a.value_, MPFR_RNDN);
}

std::string Real::to_string(int sig_digits) const {
    return format_scientific(value_, static_cast<std::size_t>(std::max(sig_digits, 1)));
}

std::string Real::to_fixed_string(int sig_digits) const {
    return format_positional(value_, static_cast<std::size_t>(std::max(sig_digits, 1)));
}

std::string Real::to_exact_string() const {
    return format_scientific(value_, mpfr_get_str_ndigits(10, bits()));
}

void Real::widen_to(mpfr_prec_t b) {
    if (b > bits()) mpfr_prec_round(value_, b, MPFR_RNDN);
}

Real& Real::operator+=(const Real& o) {
    widen_to(o.bits());
    mpfr_add(value_, value_, o.value_, MPFR_RNDN);
    return *this;
}
Real& Real::operator-=(const Real& o) {
    widen_to(o.bits());
    mpfr_sub(value_, value_, o.value_, MPFR_RNDN);
    return *this;
}
Real& Real::operator*=(const Real& o) {
    widen_to(o.bits());
    mpfr_mul(value_, value_, o.value_, MPFR_RNDN);
    return *this;
}
Real& Real::operator/=(const Real& o) {
    widen_to(o.bits());
    mpfr_div(value_, value_, o.value_, MPFR_RNDN);
    return *this;
}
Real& Real::operator*=(long o) {
    mpfr_mul_si(value_, value_, o, MPFR_RNDN);
    return *this;
}
Real& Real::operator/=(long o) {
    mpfr_div_si(value_, value_, o, MPFR_RNDN);
    return *this;
}

Real Real::operator-() const {
    Real r(bits());
    mpfr_neg(r.value_, value_, MPFR_RNDN);
    return r;
}

Real operator+(const Real& a, const Real& b) {
    Real r(std::max(a.bits(), b.bits()));
    mpfr_add(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}
Real operator-(const Real& a, const Real& b) {
    Real r(std::max(a.bits(), b.bits()));
    mpfr_sub(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}
Real operator*(const Real& a, const Real& b) {
    Real r(std::max(a.bits(), b.bits()));
    mpfr_mul(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}
Real operator/(const Real& a, const Real& b) {
    Real r(std::max(a.bits(), b.bits()));
    mpfr_div(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}
Real operator*(const Real& a, long b) {
    Real r(a.bits());
    mpfr_mul_si(r.value_, a.value_, b, MPFR_RNDN);
    return r;
}
Real operator*(long a, const Real& b) { return b * a; }
Real operator/(const Real& a, long b) {
    Real r(a.bits());
    mpfr_div_si(r.value_, a.value_, b, MPFR_RNDN);
    return r;
}
Real operator+(const Real& a, long b) {
    Real r(a.bits());
    mpfr_add_si(r.value_, a.value_, b, MPFR_RNDN);
    return r;
}
Real operator-(const Real& a, long b) {
    Real r(a.bits());
    mpfr_sub_si(r.value_, a.value_, b, MPFR_RNDN);
    return r;
}
Real operator-(long a, const Real& b) {
    Real r(b.bits());
    mpfr_si_sub(r.value_, a, b.value_, MPFR_RNDN);
    return r;
}

bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }

std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (mpfr_unordered_p(a.value_, b.value_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.value_, b.value_);
    if (c < 0) return std::partial_ordering::less;
    if (c > 0) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
}

bool operator==(const Real& a, long b) { return !mpfr_nan_p(a.value_) && mpfr_cmp_si(a.value_, b) == 0; }

std::partial_ordering operator<=>(const Real& a, long b) {
    if (mpfr_nan_p(a.value_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp_si(a.value_, b);
    if (c < 0) return std::partial_ordering::less;
    if (c > 0) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
}

#define CHOREO_UNARY(name, fn)                           \
    Real name(const Real& x) {                           \
        Real r(x.bits());                                \
        fn(r.get(), x.get(), MPFR_RNDN);                 \
        return r;                                        \
    }

CHOREO_UNARY(abs, mpfr_abs)
CHOREO_UNARY(sqrt, mpfr_sqrt)
CHOREO_UNARY(cbrt, mpfr_cbrt)
CHOREO_UNARY(exp, mpfr_exp)
CHOREO_UNARY(log, mpfr_log)
CHOREO_UNARY(log10, mpfr_log10)
CHOREO_UNARY(sin, mpfr_sin)
CHOREO_UNARY(cos, mpfr_cos)

#undef CHOREO_UNARY

Real pow(const Real& x, const Real& y) {
    Real r(std::max(x.bits(), y.bits()));
    mpfr_pow(r.get(), x.get(), y.get(), MPFR_RNDN);
    return r;
}

Real pow(const Real& x, long n) {
    Real r(x.bits());
    mpfr_pow_si(r.get(), x.get(), n, MPFR_RNDN);
    return r;
}

Real atan2(const Real& y, const Real& x) {
    Real r(std::max(x.bits(), y.bits()));
    mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
    return r;
}

Real hypot(const Real& x, const Real& y) {
    Real r(std::max(x.bits(), y.bits()));
    mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
    return r;
}

Real min(const Real& a, const Real& b) { return a <= b ? a : b; }
Real max(const Real& a, const Real& b) { return a >= b ? a : b; }

Real pow10(long n, int digits) {
    Real r(bits_for_digits(digits));
    mpfr_ui_pow_ui(r.get(), 10, static_cast<unsigned long>(n < 0 ? -n : n), MPFR_RNDN);
    if (n < 0) mpfr_ui_div(r.get(), 1, r.get(), MPFR_RNDN);
    return r;
}

int matching_digits(const Real& a, const Real& b, int cap) {
    Real diff = abs(a - b);
    if (diff.is_zero()) return cap;
    Real scale = abs(b);
    Real rel = scale.is_zero() ? diff : diff / scale;
    double l = -std::log10(rel.to_double());
    if (!std::isfinite(l)) {
        // beyond double range: fall back to the decimal exponent
        return static_cast<int>(std::min<long>(cap, -rel.exponent10() - 1));
    }
    return std::clamp(static_cast<int>(std::floor(l)), 0, cap);
}

std::ostream& operator<<(std::ostream& os, const Real& x) {
    auto p = os.precision();
    return os << x.to_string(static_cast<int>(p > 0 ? p : 17));
}

}  // namespace choreo
