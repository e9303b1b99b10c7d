#include "choreo/newton.hpp"

#include "choreo/errors.hpp"
#include "choreo/variational.hpp"

#include <algorithm>
#include <cmath>

namespace choreo {

std::string to_string(NewtonMode mode) { return mode == NewtonMode::Classic ? "classic" : "modified"; }

NewtonMode parse_newton_mode(std::string_view name) {
    if (name == "classic") return NewtonMode::Classic;
    if (name == "modified") return NewtonMode::Modified;
    throw ConfigError("unknown Newton mode '" + std::string(name) + "'");
}

NewtonConfig NewtonConfig::modified(const IntegratorConfig& integrator) {
    NewtonConfig cfg;
    cfg.integrator = integrator;
    return cfg;
}

NewtonConfig NewtonConfig::classic(const IntegratorConfig& integrator) {
    NewtonConfig cfg;
    cfg.mode = NewtonMode::Classic;
    cfg.maxiter = 10;
    cfg.integrator = integrator;
    return cfg;
}

Real NewtonConfig::effective_tolerance() const {
    if (tolerance) return tolerance->at_digits(integrator.digits);
    const int d = integrator.digits;
    // 1e-40 at the 64-digit desk preset
    if (mode == NewtonMode::Modified) return pow10(-(5L * d) / 8, d);
    return pow10(-(d - 2 * kGuardDigits), d);
}

void NewtonConfig::validate() const {
    integrator.validate();
    if (!(tau0 > 0.0 && tau0 <= 1.0)) throw ConfigError("tau0 must lie in (0,1]");
    if (maxiter < 1) throw ConfigError("maxiter must be positive");
    if (tolerance && !(*tolerance > 0L)) throw ConfigError("Newton tolerance must be positive");
    if (!(t0 > 1.0)) throw ConfigError("t0 must exceed 1");
}

Residual residual(const SearchTriplet& triplet, const IntegratorConfig& cfg) {
    if (!(triplet.period >= 0L)) throw PreconditionError("period must be non-negative");
    const StateVector x0 = state_at_digits(build_initial_state(triplet.vx, triplet.vy), cfg.digits);
    TaylorPropagator prop(cfg);
    const auto res = prop.propagate(x0, {}, triplet.period);
    Residual out;
    out.vec.reserve(kDim);
    for (std::size_t i = 0; i < kDim; ++i) out.vec.push_back(x0[i] - res.state[i]);
    out.norm = distance2(x0, res.state);
    return out;
}

LinearSystem build_system(const SearchTriplet& triplet, const IntegratorConfig& cfg) {
    const int d = cfg.digits;
    const auto sens = integrate_param_sensitivities(triplet.vx, triplet.vy, triplet.period, cfg);
    const StateVector x0 = state_at_digits(build_initial_state(triplet.vx, triplet.vy), d);
    const StateVector dvx = initial_state_derivative_vx(d);
    const StateVector dvy = initial_state_derivative_vy(d);
    const StateVector flow = rhs(sens.base, Real::with_bits(cfg.collision_threshold, bits_for_digits(d)));
    LinearSystem sys{Matrix(kDim, 3, d), {}, distance2(x0, sens.base), sens.base};
    sys.b.reserve(kDim);
    for (std::size_t i = 0; i < kDim; ++i) {
        sys.a(i, 0) = sens.columns[0][i] - dvx[i];
        sys.a(i, 1) = sens.columns[1][i] - dvy[i];
        sys.a(i, 2) = flow[i];
        sys.b.push_back(x0[i] - sens.base[i]);
    }
    return sys;
}

std::vector<Real> solve_least_squares(const Matrix& a_in, const std::vector<Real>& b_in) {
    const std::size_t m = a_in.rows();
    const std::size_t n = a_in.cols();
    if (b_in.size() != m) throw PreconditionError("right-hand side length mismatch");
    if (m < n) throw PreconditionError("least squares needs at least as many rows as columns");
    const int d = std::max(a_in.digits(), b_in.empty() ? 16 : b_in[0].digits());
    const mpfr_prec_t bits = bits_for_digits(d);
    Matrix a = a_in.at_digits(d);
    std::vector<Real> b;
    for (const auto& x : b_in) b.push_back(x.at_digits(d));

    std::vector<Real> v(m, Real(bits));
    for (std::size_t k = 0; k < n; ++k) {
        Real norm(bits);
        for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
        norm = sqrt(norm);
        if (norm.is_zero()) continue;
        // reflect onto -sign(a_kk) e_k to avoid cancellation
        const Real alpha = a(k, k).sign() >= 0 ? -norm : norm;
        for (std::size_t i = 0; i < m; ++i) v[i] = i < k ? Real(bits) : a(i, k);
        v[k] -= alpha;
        Real vnorm2(bits);
        for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2.is_zero()) continue;
        auto reflect = [&](auto get) {
            Real dot(bits);
            for (std::size_t i = k; i < m; ++i) dot += v[i] * get(i);
            const Real f = 2L * dot / vnorm2;
            for (std::size_t i = k; i < m; ++i) get(i) -= f * v[i];
        };
        for (std::size_t c = k; c < n; ++c) reflect([&](std::size_t i) -> Real& { return a(i, c); });
        reflect([&](std::size_t i) -> Real& { return b[i]; });
    }

    Real rmax(bits);
    for (std::size_t k = 0; k < n; ++k) rmax = max(rmax, abs(a(k, k)));
    const Real cutoff = rmax * pow10(-(d - kGuardDigits), d);
    for (std::size_t k = 0; k < n; ++k) {
        if (rmax.is_zero() || abs(a(k, k)) <= cutoff) {
            throw RankDeficient("column " + std::to_string(k + 1) + " of the least-squares system is degenerate");
        }
    }
    std::vector<Real> x(n, Real(bits));
    for (std::size_t k = n; k-- > 0;) {
        Real acc = b[k];
        for (std::size_t c = k + 1; c < n; ++c) acc -= a(k, c) * x[c];
        x[k] = acc / a(k, k);
    }
    return x;
}

double tau_update(double tau_prev, const Real& r_prev, const Real& r_curr, double tau0) {
    if (!(r_prev > 0L) || !(r_curr > 0L)) throw PreconditionError("residuals must be positive");
    const double ratio = (r_prev / r_curr).to_double();
    const double next = tau_prev * ratio;
    if (r_curr <= r_prev) return std::min(1.0, next);
    return std::max(tau0, next);
}

NewtonResult correct(const SearchTriplet& start, const NewtonConfig& cfg) {
    cfg.validate();
    const int d = cfg.integrator.digits;
    const Real tol = cfg.effective_tolerance();
    const Real t_min(1L, d);
    const Real t_max = Real(cfg.t0, d) * 3L;

    NewtonResult out;
    out.triplet = {start.vx.at_digits(d), start.vy.at_digits(d), start.period.at_digits(d)};
    double tau = cfg.tau0;
    Real r_prev;
    for (int k = 0;; ++k) {
        LinearSystem sys;
        try {
            sys = build_system(out.triplet, cfg.integrator);
        } catch (const CollisionError& e) {
            out.cause = std::string("collision: ") + e.what();
            return out;
        } catch (const MaxStepsExceeded& e) {
            out.cause = std::string("step budget: ") + e.what();
            return out;
        }
        IterationRecord rec{k, sys.residual, 1.0, Real(bits_for_digits(d)), Real(bits_for_digits(d)),
                            Real(bits_for_digits(d))};
        out.residual = sys.residual;
        if (sys.residual < tol) {
            rec.tau = 0.0;
            out.trace.push_back(rec);
            out.converged = true;
            return out;
        }
        if (k >= cfg.maxiter) {
            out.trace.push_back(rec);
            out.cause = "no convergence after " + std::to_string(cfg.maxiter) + " iterations";
            return out;
        }
        std::vector<Real> delta;
        try {
            delta = solve_least_squares(sys.a, sys.b);
        } catch (const RankDeficient& e) {
            out.trace.push_back(rec);
            out.cause = std::string("rank deficient: ") + e.what();
            return out;
        }
        if (cfg.mode == NewtonMode::Classic) {
            tau = 1.0;
        } else if (k > 0) {
            tau = tau_update(tau, r_prev, sys.residual, cfg.tau0);
        }
        rec.tau = tau;
        rec.dvx = delta[0];
        rec.dvy = delta[1];
        rec.dT = delta[2];
        out.trace.push_back(rec);
        const Real t = Real(tau, d);
        out.triplet.vx += t * delta[0];
        out.triplet.vy += t * delta[1];
        out.triplet.period += t * delta[2];
        out.residual.reset();
        r_prev = sys.residual;
        if (out.triplet.period < t_min || out.triplet.period > t_max) {
            out.cause = "period left [1, 3 t0]: T = " + out.triplet.period.to_string(10);
            return out;
        }
    }
}

std::optional<double> quadratic_slope(const std::vector<IterationRecord>& trace, const Real& floor) {
    std::vector<double> logs;
    for (const auto& rec : trace) {
        if (rec.residual > floor && rec.residual > 0L) logs.push_back(log10(rec.residual).to_double());
    }
    if (logs.size() < 3) return std::nullopt;
    const std::size_t n = logs.size();
    // least-squares line through (log R_k, log R_{k+1}) for the last two pairs
    const double x0 = logs[n - 3], x1 = logs[n - 2];
    const double y0 = logs[n - 2], y1 = logs[n - 1];
    if (x1 == x0) return std::nullopt;
    return (y1 - y0) / (x1 - x0);
}

PolishConfig PolishConfig::for_target(int digits_target) {
    PolishConfig cfg;
    cfg.digits_target = digits_target;
    if (digits_target != 180) {
        cfg.primary = IntegratorConfig::for_digits(digits_target + 20);
        cfg.verification = IntegratorConfig::for_digits(digits_target + 40);
    }
    return cfg;
}

Real PolishConfig::tolerance_for(const IntegratorConfig& integrator) const {
    const int d = integrator.digits;
    const long exponent = std::min<long>(digits_target + kGuardDigits, d - kGuardDigits);
    return pow10(-exponent, d);
}

PolishResult polish(const SearchTriplet& triplet, const PolishConfig& cfg) {
    if (cfg.digits_target < 1) throw ConfigError("digits_target must be positive");
    auto run = [&](const IntegratorConfig& integrator) {
        NewtonConfig nc = NewtonConfig::classic(integrator);
        nc.maxiter = cfg.maxiter;
        nc.tolerance = cfg.tolerance_for(integrator);
        nc.t0 = std::max(300.0, triplet.period.to_double());
        NewtonResult r = correct(triplet, nc);
        if (!r.converged) {
            throw NoConvergence("classic Newton at " + integrator.name() + " failed: " + r.cause);
        }
        return r;
    };
    PolishResult out;
    out.primary_run = run(cfg.primary);
    out.verification_run = run(cfg.verification);
    out.triplet = out.primary_run.triplet;
    out.verification = out.verification_run.triplet;
    const int cap = cfg.primary.digits;
    out.matched_digits = std::min({matching_digits(out.triplet.vx, out.verification.vx, cap),
                                   matching_digits(out.triplet.vy, out.verification.vy, cap),
                                   matching_digits(out.triplet.period, out.verification.period, cap)});
    out.quadratic_slope =
        quadratic_slope(out.primary_run.trace, pow10(-(cfg.primary.digits - kGuardDigits), cfg.primary.digits));
    if (out.matched_digits < cfg.digits_target) {
        throw VerificationMismatch("polished triplets agree to " + std::to_string(out.matched_digits) +
                                   " digits, below the target " + std::to_string(cfg.digits_target));
    }
    return out;
}

}  // namespace choreo
