#include "choreo/taylor.hpp"

#include "choreo/errors.hpp"
#include "series_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace choreo {

int IntegratorConfig::default_order(int digits) { return static_cast<int>(std::ceil(1.15 * digits - 1e-9)); }

IntegratorConfig IntegratorConfig::for_digits(int digits) {
    IntegratorConfig cfg;
    cfg.digits = digits;
    cfg.order = default_order(digits);
    return cfg;
}

IntegratorConfig IntegratorConfig::preset(std::string_view name) {
    auto make = [](int d, int k) {
        IntegratorConfig cfg;
        cfg.digits = d;
        cfg.order = k;
        return cfg;
    };
    if (name == "scan") return make(32, 40);
    if (name == "desk") return make(64, 74);
    if (name == "stage1") return make(134, 154);
    if (name == "stage3a") return make(212, 242);
    if (name == "stage3b") return make(250, 286);
    if (name.size() > 1 && name.front() == 'd') {
        int d = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), d);
        if (ec == std::errc() && ptr == name.data() + name.size() && d >= 16) return for_digits(d);
    }
    throw ConfigError("unknown integrator preset '" + std::string(name) + "'");
}

void IntegratorConfig::validate() const {
    if (order < 4) throw ConfigError("Taylor order must be at least 4");
    if (digits < 16) throw ConfigError("precision must be at least 16 digits");
    if (!(step_safety > 0.0 && step_safety < 1.0)) throw ConfigError("step_safety must lie in (0,1)");
    if (!(collision_threshold > 0.0)) throw ConfigError("collision threshold must be positive");
    if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
    if (max_steps < 1) throw ConfigError("max_steps must be positive");
}

std::string IntegratorConfig::name() const {
    for (const char* n : {"scan", "desk", "stage1", "stage3a", "stage3b"}) {
        auto p = preset(n);
        if (p.digits == digits && p.order == order) return n;
    }
    if (order == default_order(digits)) return "d" + std::to_string(digits);
    return "d" + std::to_string(digits) + "k" + std::to_string(order);
}

TaylorExpansion taylor_coefficients(const StateVector& state, int order, double collision_threshold) {
    if (order < 1) throw PreconditionError("order must be positive");
    mpfr_prec_t bits = MPFR_PREC_MIN;
    for (const auto& x : state) bits = std::max(bits, x.bits());
    detail::SeriesEngine engine(order, bits, 0);
    Real thr = Real::with_bits(collision_threshold, bits);
    engine.expand(state, {}, thr * thr);
    TaylorExpansion out = engine.expansion();
    if (order >= 2) {
        try {
            out.step = detail::natural_step(out, IntegratorConfig{}.step_safety);
        } catch (const DegenerateSeries&) {
            out.step = Real::with_bits(IntegratorConfig{}.max_step, bits);
        }
    }
    return out;
}

Real select_stepsize(const TaylorExpansion& exp, double step_safety) {
    if (!(step_safety > 0.0 && step_safety < 1.0)) throw PreconditionError("step_safety must lie in (0,1)");
    return detail::natural_step(exp, step_safety);
}

StateVector advance(const TaylorExpansion& exp, const Real& h) {
    if (exp.coefficients.empty()) throw PreconditionError("empty expansion");
    const mpfr_prec_t bits = exp.coefficients[0][0].bits();
    StateVector out;
    Real acc(bits);
    const int order = exp.order();
    for (std::size_t i = 0; i < kDim; ++i) {
        mpfr_set(acc.get(), exp.coefficients[order][i].get(), MPFR_RNDN);
        for (int k = order - 1; k >= 0; --k) {
            mpfr_mul(acc.get(), acc.get(), h.get(), MPFR_RNDN);
            mpfr_add(acc.get(), acc.get(), exp.coefficients[k][i].get(), MPFR_RNDN);
        }
        out[i] = acc;
    }
    return out;
}

TaylorPropagator::TaylorPropagator(const IntegratorConfig& cfg, int columns)
    : cfg_(cfg), columns_(columns) {
    cfg_.validate();
    if (columns < 0) throw PreconditionError("negative column count");
    engine_ = std::make_unique<detail::SeriesEngine>(cfg_.order, bits_for_digits(cfg_.digits), columns);
}

TaylorPropagator::~TaylorPropagator() = default;
TaylorPropagator::TaylorPropagator(TaylorPropagator&&) noexcept = default;
TaylorPropagator& TaylorPropagator::operator=(TaylorPropagator&&) noexcept = default;

TaylorPropagator::Result TaylorPropagator::propagate(const StateVector& state, std::span<const StateVector> columns,
                                                     const Real& t_target, const StepObserver& observer) {
    if (static_cast<int>(columns.size()) != columns_) throw PreconditionError("column count mismatch");
    if (t_target < 0L) throw PreconditionError("integration target must be non-negative");
    const mpfr_prec_t bits = engine_->bits();
    const int digits = cfg_.digits;

    Result res;
    res.state = state_at_digits(state, digits);
    res.columns.reserve(columns.size());
    for (const auto& c : columns) res.columns.push_back(state_at_digits(c, digits));

    const Real target = t_target.at_digits(digits);
    Real thr = Real::with_bits(cfg_.collision_threshold, bits);
    const Real thr2 = thr * thr;
    Real t(bits), h(bits), remaining(bits);
    StateVector next = make_state(digits);
    std::vector<StateVector> next_cols(columns.size(), make_state(digits));

    while (t < target) {
        if (res.steps >= cfg_.max_steps) {
            throw MaxStepsExceeded("exceeded " + std::to_string(cfg_.max_steps) + " integration steps at t = " +
                                   t.to_string(12));
        }
        engine_->expand(res.state, res.columns, thr2);
        try {
            h = detail::natural_step(engine_->expansion(), cfg_.step_safety);
        } catch (const DegenerateSeries&) {
            h = Real::with_bits(cfg_.max_step, bits);
        }
        mpfr_sub(remaining.get(), target.get(), t.get(), MPFR_RNDN);
        const bool last = h >= remaining;
        if (last) h = remaining;
        engine_->expansion().step = h;
        engine_->evaluate(h, next);
        for (int m = 0; m < columns_; ++m) engine_->evaluate_column(m, h, next_cols[static_cast<std::size_t>(m)]);
        if (observer) observer(StepInfo{t, h, engine_->expansion(), next});
        if (last) {
            t = target;
        } else {
            mpfr_add(t.get(), t.get(), h.get(), MPFR_RNDN);
        }
        std::swap(res.state, next);
        std::swap(res.columns, next_cols);
        ++res.steps;
    }
    return res;
}

Trajectory integrate_to(const StateVector& state, const Real& t_target, const IntegratorConfig& cfg,
                        const StepObserver& observer) {
    if (!(t_target > 0L)) throw PreconditionError("integrate_to needs t_target > 0");
    TaylorPropagator prop(cfg);
    Trajectory traj;
    traj.times.push_back(Real(bits_for_digits(cfg.digits)));
    traj.states.push_back(state_at_digits(state, cfg.digits));
    prop.propagate(state, {}, t_target, [&](const StepInfo& step) {
        if (cfg.retain_expansions) traj.expansions.push_back(step.expansion);
        traj.times.push_back(step.t_start + step.h);
        traj.states.push_back(step.end_state);
        if (observer) observer(step);
    });
    // the clamped last step lands exactly on the target
    traj.times.back() = t_target.at_digits(cfg.digits);
    return traj;
}

StateVector dense_eval(const Trajectory& traj, const Real& t) {
    if (traj.times.empty()) throw OutOfRange("empty trajectory");
    if (t < traj.times.front() || t > traj.times.back()) {
        throw OutOfRange("time " + t.to_string(12) + " outside the trajectory span");
    }
    // upper_bound - 1 gives the step whose start is <= t
    auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t,
                               [](const Real& a, const Real& b) { return a < b; });
    std::size_t n = static_cast<std::size_t>(std::distance(traj.times.begin(), it));
    n = n == 0 ? 0 : n - 1;
    if (n >= traj.steps()) return traj.states.back();
    if (traj.times[n] == t) return traj.states[n];
    if (traj.expansions.size() != traj.steps()) throw OutOfRange("trajectory was integrated without retained expansions");
    return advance(traj.expansions[n], t - traj.times[n]);
}

}  // namespace choreo
