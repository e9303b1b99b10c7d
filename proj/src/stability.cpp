#include "choreo/stability.hpp"

#include "choreo/errors.hpp"
#include "choreo/newton.hpp"
#include "choreo/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace choreo {

Real Eigenvalue::modulus() const { return hypot(re, im); }

namespace {

Real sign_of(const Real& a, const Real& b) { return b.sign() >= 0 ? abs(a) : -abs(a); }

// Scales rows and columns by powers of two until their norms are comparable.
void balance(Matrix& a) {
    const std::size_t n = a.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::fabs(a(j, i).to_double());
                r += std::fabs(a(i, j).to_double());
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            long e = 0;
            double g = r / 2.0;
            while (c < g) {
                ++e;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c > g) {
                --e;
                c /= 4.0;
            }
            if ((c + r) / std::ldexp(1.0, static_cast<int>(e)) < 0.95 * s) {
                done = false;
                for (std::size_t j = 0; j < n; ++j) mpfr_mul_2si(a(i, j).get(), a(i, j).get(), -e, MPFR_RNDN);
                for (std::size_t j = 0; j < n; ++j) mpfr_mul_2si(a(j, i).get(), a(j, i).get(), e, MPFR_RNDN);
            }
        }
    }
}

// Upper Hessenberg form by stabilised elimination; the part below the
// subdiagonal is cleared afterwards.
void hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    for (std::size_t m = 1; m + 1 < n; ++m) {
        Real x = a(m, m - 1);
        std::size_t piv = m;
        for (std::size_t j = m; j < n; ++j) {
            if (abs(a(j, m - 1)) > abs(x)) {
                x = a(j, m - 1);
                piv = j;
            }
        }
        if (piv != m) {
            for (std::size_t j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
            for (std::size_t j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
        }
        if (x.is_zero()) continue;
        for (std::size_t i = m + 1; i < n; ++i) {
            Real y = a(i, m - 1);
            if (y.is_zero()) continue;
            y /= x;
            a(i, m - 1) = y;
            for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
            for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
        }
    }
    for (std::size_t i = 2; i < n; ++i) {
        for (std::size_t j = 0; j + 1 < i; ++j) a(i, j) = Real(bits_for_digits(a.digits()));
    }
}

// Francis double-shift QR on an upper Hessenberg matrix (1-based indexing
// through H to keep the classic loop bounds readable).
void hessenberg_qr(Matrix& a, std::vector<Real>& wr, std::vector<Real>& wi) {
    const int n = static_cast<int>(a.rows());
    const int digits = a.digits();
    const mpfr_prec_t bits = bits_for_digits(digits);
    auto H = [&](int i, int j) -> Real& { return a(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)); };
    auto W = [](std::vector<Real>& v, int i) -> Real& { return v[static_cast<std::size_t>(i - 1)]; };
    Real eps(bits);
    mpfr_set_ui_2exp(eps.get(), 1, -(bits - 4), MPFR_RNDN);
    const Real zero(bits);

    Real anorm(bits);
    for (int i = 1; i <= n; ++i) {
        for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += abs(H(i, j));
    }
    Real p(bits), q(bits), r(bits), s(bits), t(bits), u(bits), v(bits), w(bits), x(bits), y(bits), z(bits);
    int nn = n;
    int total = 0;
    const int budget = 60 * n;
    while (nn >= 1) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 2; --l) {
                s = abs(H(l - 1, l - 1)) + abs(H(l, l));
                if (s.is_zero()) s = anorm;
                if (abs(H(l, l - 1)) <= eps * s) {
                    H(l, l - 1) = zero;
                    break;
                }
            }
            x = H(nn, nn);
            if (l == nn) {
                W(wr, nn) = x + t;
                W(wi, nn) = zero;
                --nn;
            } else {
                y = H(nn - 1, nn - 1);
                w = H(nn, nn - 1) * H(nn - 1, nn);
                if (l == nn - 1) {
                    p = (y - x) / 2L;
                    q = p * p + w;
                    z = sqrt(abs(q));
                    x += t;
                    if (q.sign() >= 0) {
                        z = p + sign_of(z, p);
                        W(wr, nn - 1) = x + z;
                        W(wr, nn) = x + z;
                        if (!z.is_zero()) W(wr, nn) = x - w / z;
                        W(wi, nn - 1) = zero;
                        W(wi, nn) = zero;
                    } else {
                        W(wr, nn - 1) = x + p;
                        W(wr, nn) = x + p;
                        W(wi, nn - 1) = -z;
                        W(wi, nn) = z;
                    }
                    nn -= 2;
                } else {
                    if (++total > budget) throw NoConvergence("QR iteration exceeded its sweep budget");
                    if (its > 0 && its % 10 == 0) {
                        // exceptional shift
                        t += x;
                        for (int i = 1; i <= nn; ++i) H(i, i) -= x;
                        s = abs(H(nn, nn - 1)) + abs(H(nn - 1, nn - 2));
                        x = s * 3L / 4L;
                        y = x;
                        w = s * s * -7L / 16L;
                    }
                    ++its;
                    int m = nn - 2;
                    for (; m >= l; --m) {
                        z = H(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / H(m + 1, m) + H(m, m + 1);
                        q = H(m + 1, m + 1) - z - r - s;
                        r = H(m + 2, m + 1);
                        s = abs(p) + abs(q) + abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        u = abs(H(m, m - 1)) * (abs(q) + abs(r));
                        v = abs(p) * (abs(H(m - 1, m - 1)) + abs(z) + abs(H(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        H(i, i - 2) = zero;
                        if (i != m + 2) H(i, i - 3) = zero;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = H(k, k - 1);
                            q = H(k + 1, k - 1);
                            r = zero;
                            if (k != nn - 1) r = H(k + 2, k - 1);
                            x = abs(p) + abs(q) + abs(r);
                            if (!x.is_zero()) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = sign_of(sqrt(p * p + q * q + r * r), p);
                        if (s.is_zero()) continue;
                        if (k == m) {
                            if (l != m) H(k, k - 1) = -H(k, k - 1);
                        } else {
                            H(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            p = H(k, j) + q * H(k + 1, j);
                            if (k != nn - 1) {
                                p += r * H(k + 2, j);
                                H(k + 2, j) -= p * z;
                            }
                            H(k + 1, j) -= p * y;
                            H(k, j) -= p * x;
                        }
                        const int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            p = x * H(i, k) + y * H(i, k + 1);
                            if (k != nn - 1) {
                                p += z * H(i, k + 2);
                                H(i, k + 2) -= p * r;
                            }
                            H(i, k + 1) -= p * q;
                            H(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
}

struct Cx {
    Real re, im;
};

Cx operator-(const Cx& a, const Cx& b) { return {a.re - b.re, a.im - b.im}; }
Cx operator*(const Cx& a, const Cx& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
Cx operator/(const Cx& a, const Cx& b) {
    const Real den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
Real cabs(const Cx& a) { return hypot(a.re, a.im); }

// Eigenvector of m for the eigenvalue lambda by inverse iteration.
std::vector<Cx> eigenvector(const Matrix& m, const Cx& lambda) {
    const std::size_t n = m.rows();
    const mpfr_prec_t bits = bits_for_digits(m.digits());
    const Real zero(bits);
    std::vector<std::vector<Cx>> lu(n, std::vector<Cx>(n, Cx{zero, zero}));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) lu[i][j] = {m(i, j), zero};
        lu[i][i] = lu[i][i] - lambda;
    }
    Real tiny(bits);
    mpfr_set_ui_2exp(tiny.get(), 1, -(bits - 8), MPFR_RNDN);
    tiny *= max(max_abs(m), Real(1L, m.digits()));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (cabs(lu[r][k]) > cabs(lu[piv][k])) piv = r;
        }
        std::swap(lu[k], lu[piv]);
        std::swap(perm[k], perm[piv]);
        if (cabs(lu[k][k]) < tiny) lu[k][k] = {tiny, zero};
        for (std::size_t r = k + 1; r < n; ++r) {
            const Cx f = lu[r][k] / lu[k][k];
            lu[r][k] = f;
            for (std::size_t c = k + 1; c < n; ++c) lu[r][c] = lu[r][c] - f * lu[k][c];
        }
    }
    std::vector<Cx> x(n, Cx{Real(1L, m.digits()), zero});
    for (int iter = 0; iter < 3; ++iter) {
        std::vector<Cx> b(n, Cx{zero, zero});
        for (std::size_t i = 0; i < n; ++i) b[i] = x[perm[i]];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) b[i] = b[i] - lu[i][k] * b[k];
        }
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) b[i] = b[i] - lu[i][k] * b[k];
            b[i] = b[i] / lu[i][i];
        }
        Real norm(bits);
        for (const auto& c : b) norm += c.re * c.re + c.im * c.im;
        norm = sqrt(norm);
        for (auto& c : b) c = {c.re / norm, c.im / norm};
        x = std::move(b);
    }
    return x;
}

Real condition_number(const Matrix& m, const Matrix& mt, const Real& re, const Real& im) {
    const Cx lambda{re, im};
    const auto x = eigenvector(m, lambda);
    const auto z = eigenvector(mt, lambda);  // conj of the left eigenvector
    Real dr(bits_for_digits(m.digits())), di(bits_for_digits(m.digits()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Cx p = z[i] * x[i];
        dr += p.re;
        di += p.im;
    }
    const Real d = hypot(dr, di);
    if (d.is_zero()) {
        Real inf(bits_for_digits(m.digits()));
        mpfr_set_inf(inf.get(), 1);
        return inf;
    }
    return Real(1L, m.digits()) / d;
}

}  // namespace

std::vector<Eigenvalue> eigenvalues(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw PreconditionError("eigenvalues need a non-empty square matrix");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (!m(i, j).is_finite()) throw PreconditionError("matrix has non-finite entries");
        }
    }
    const mpfr_prec_t bits = bits_for_digits(m.digits());
    Matrix a = m;
    balance(a);
    hessenberg(a);
    std::vector<Real> wr(m.rows(), Real(bits)), wi(m.rows(), Real(bits));
    hessenberg_qr(a, wr, wi);
    const Matrix mt = m.transposed();
    std::vector<Eigenvalue> out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out.push_back({wr[i], wi[i], condition_number(m, mt, wr[i], wi[i])});
    }
    // deterministic order: by real part, then imaginary part
    std::sort(out.begin(), out.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
        if (a.re != b.re) return a.re < b.re;
        return a.im < b.im;
    });
    return out;
}

std::string to_string(BlockKind kind) {
    switch (kind) {
        case BlockKind::Elliptic: return "elliptic";
        case BlockKind::Marginal: return "marginal";
        case BlockKind::Hyperbolic: return "hyperbolic";
        case BlockKind::Loxodromic: return "loxodromic";
    }
    return "unknown";
}

Real stability_tolerance(int digits) { return pow10(-(digits / 4), digits); }

EigenReport classify(const std::vector<Eigenvalue>& eigs) {
    const int digits = eigs.empty() ? 16 : eigs[0].re.digits();
    return classify(eigs, stability_tolerance(digits));
}

EigenReport classify(const std::vector<Eigenvalue>& eigs, const Real& tolerance) {
    if (eigs.size() != kDim) throw PreconditionError("expected 12 eigenvalues");
    EigenReport rep;
    rep.digits = eigs[0].re.digits();
    rep.eigenvalues = eigs;
    const int d = rep.digits;
    const Real one(1L, d);

    auto dist_to = [&](const Eigenvalue& e, long target) { return hypot(e.re - target, e.im); };
    std::vector<std::size_t> order(eigs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist_to(eigs[a], 1) < dist_to(eigs[b], 1); });
    std::size_t within = 0;
    for (std::size_t i : order) {
        if (dist_to(eigs[i], 1) < tolerance) ++within;
    }
    if (within < 8) {
        throw UnitCountMismatch("only " + std::to_string(within) + " eigenvalues lie within " +
                                tolerance.to_string(3) + " of 1");
    }
    rep.unit_indices.assign(order.begin(), order.begin() + 8);
    rep.nontrivial_indices.assign(order.begin() + 8, order.end());
    std::sort(rep.unit_indices.begin(), rep.unit_indices.end());
    std::sort(rep.nontrivial_indices.begin(), rep.nontrivial_indices.end());

    const Real two_pi = Real::pi(d) * 2L;
    std::size_t marginal = 0;
    bool loxodromic = false;
    for (std::size_t i : rep.nontrivial_indices) {
        const Eigenvalue& e = eigs[i];
        const Real mod = e.modulus();
        const bool on_circle = abs(mod - one) < tolerance;
        const bool real_axis = abs(e.im) < tolerance;
        if (dist_to(e, 1) < tolerance || dist_to(e, -1) < tolerance) {
            ++marginal;
        } else if (on_circle) {
            if (e.im.sign() > 0) {
                EigenBlock b{BlockKind::Elliptic, e.re, e.im, {}, {}, 1};
                Real nu = abs(atan2(e.im, e.re)) / two_pi;
                b.nu = nu;
                rep.blocks.push_back(std::move(b));
            }
        } else if (real_axis) {
            if (mod > one) {
                EigenBlock b{BlockKind::Hyperbolic, e.re, Real(bits_for_digits(d)), {}, log(mod), e.re.sign()};
                rep.blocks.push_back(std::move(b));
            }
        } else if (!loxodromic && mod > one && e.im.sign() > 0) {
            loxodromic = true;
            EigenBlock b{BlockKind::Loxodromic, e.re, e.im, abs(atan2(e.im, e.re)) / two_pi, log(mod), 1};
            rep.blocks.push_back(std::move(b));
        }
    }
    for (std::size_t k = 0; k < (marginal + 1) / 2; ++k) {
        rep.blocks.push_back({BlockKind::Marginal, one, Real(bits_for_digits(d)), {}, {}, 1});
    }
    // hyperbolic first, then elliptic by decreasing angle
    std::stable_sort(rep.blocks.begin(), rep.blocks.end(), [](const EigenBlock& a, const EigenBlock& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        if (a.nu && b.nu) return *a.nu > *b.nu;
        return false;
    });
    std::size_t elliptic = 0;
    for (const auto& b : rep.blocks) {
        if (!rep.type.empty()) rep.type += "-";
        rep.type += to_string(b.kind);
        if (b.kind == BlockKind::Elliptic) {
            ++elliptic;
            rep.angles.push_back(*b.nu);
        }
    }
    rep.linearly_stable = elliptic == 2;
    rep.verdict = rep.linearly_stable ? "linearly stable" : "not confirmed";
    if (!rep.linearly_stable && elliptic < 2) {
        for (const auto& b : rep.blocks) {
            if (b.kind == BlockKind::Hyperbolic || b.kind == BlockKind::Loxodromic) rep.verdict = "unstable";
        }
    }
    return rep;
}

MonodromyAnalysis analyse_monodromy(const SearchTriplet& solution, const IntegratorConfig& cfg,
                                    const Real& residual_tolerance, const Real& unit_tolerance) {
    MonodromyAnalysis out;
    out.digits = cfg.digits;
    auto mono = integrate_monodromy(solution, cfg, residual_tolerance);
    out.monodromy = std::move(mono.matrix);
    out.residual = std::move(mono.residual);
    out.determinant = determinant(out.monodromy);
    out.report = classify(eigenvalues(out.monodromy), unit_tolerance);
    return out;
}

CrossPrecisionReport verify_cross_precision(const SearchTriplet& solution, const CrossPrecisionOptions& opts) {
    if (opts.digits_lo >= opts.digits_hi) throw ConfigError("digits_lo must be below digits_hi");
    const IntegratorConfig lo_cfg = IntegratorConfig::for_digits(opts.digits_lo);
    const IntegratorConfig hi_cfg = IntegratorConfig::for_digits(opts.digits_hi);
    // the orbit itself must be accurate enough for the requested agreement
    const Real tol = pow10(-(opts.required_digits + kGuardDigits), opts.digits_hi);
    const Real pre = residual(solution, lo_cfg).norm;
    if (pre > tol) {
        throw VerificationFailed("orbit residual " + pre.to_string(3) + " at " + std::to_string(opts.digits_lo) +
                                 " digits exceeds " + tol.to_string(3) + "; the solution is not precise enough");
    }
    const int p = opts.polish_digits > 0 ? opts.polish_digits : solution.period.digits();
    CrossPrecisionReport rep;
    try {
        rep.lo = analyse_monodromy(solution, lo_cfg, tol, stability_tolerance(std::min(p, opts.digits_lo)));
        rep.hi = analyse_monodromy(solution, hi_cfg, tol, stability_tolerance(std::min(p, opts.digits_hi)));
    } catch (const UnitCountMismatch& e) {
        throw VerificationFailed(std::string("eigenvalue structure check failed: ") + e.what());
    } catch (const NotPeriodic& e) {
        throw VerificationFailed(std::string("periodicity check failed: ") + e.what());
    }
    const auto& elo = rep.lo.report.eigenvalues;
    const auto& ehi = rep.hi.report.eigenvalues;
    rep.min_matched = opts.digits_hi;
    std::string diag;
    bool cond_ok = true;
    for (std::size_t i : rep.hi.report.nontrivial_indices) {
        const Eigenvalue& h = ehi[i];
        std::size_t best = rep.lo.report.nontrivial_indices.front();
        Real best_d = hypot(elo[best].re - h.re, elo[best].im - h.im);
        for (std::size_t j : rep.lo.report.nontrivial_indices) {
            Real dd = hypot(elo[j].re - h.re, elo[j].im - h.im);
            if (dd < best_d) {
                best_d = std::move(dd);
                best = j;
            }
        }
        int digits = opts.digits_hi;
        if (!best_d.is_zero()) {
            digits = static_cast<int>(std::floor(-log10(best_d / h.modulus()).to_double()));
        }
        const int cdig = matching_digits(elo[best].condition, h.condition, opts.digits_hi);
        rep.matched_digits.push_back(digits);
        rep.condition_digits.push_back(cdig);
        rep.min_matched = std::min(rep.min_matched, digits);
        if (cdig < 1) cond_ok = false;
        diag += " (" + h.re.to_string(12) + (h.im.sign() < 0 ? " - " : " + ") + abs(h.im).to_string(12) +
                "i: " + std::to_string(digits) + " digits, condition " + std::to_string(cdig) + ")";
    }
    if (rep.min_matched < opts.required_digits || !cond_ok) {
        throw VerificationFailed("cross-precision eigenvalue agreement below " + std::to_string(opts.required_digits) +
                                 " digits or condition numbers disagree:" + diag);
    }
    return rep;
}

}  // namespace choreo
