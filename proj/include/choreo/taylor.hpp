#pragma once

#include "choreo/nbody.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace choreo {

/// Order/precision/stepping parameters of the Taylor integrator.
struct IntegratorConfig {
    int order = 74;
    int digits = 64;
    /// Multiplies the radius-of-convergence estimate; e^-2 by default.
    double step_safety = 0.1353352832366127;
    double collision_threshold = 1e-6;
    /// Step used when the top series coefficients vanish (free drift).
    double max_step = 1.0;
    long max_steps = 2'000'000;
    bool retain_expansions = false;

    /// Named presets: "scan" (32 digits, order 40), "desk" (64/74),
    /// "stage1" (134/154), "stage3a" (212/242), "stage3b" (250/286), and
    /// "d<N>" for N digits with the default order coupling.
    static IntegratorConfig preset(std::string_view name);
    /// N digits with order ceil(1.15 N).
    static IntegratorConfig for_digits(int digits);
    static int default_order(int digits);

    void validate() const;
    std::string name() const;
};

/// Truncated time power series of every state component about a step start.
struct TaylorExpansion {
    /// coefficients[k][c]: k-th Taylor coefficient of component c.
    std::vector<StateVector> coefficients;
    /// Largest step this expansion is meant to be evaluated at.
    Real step;

    int order() const { return static_cast<int>(coefficients.size()) - 1; }
};

struct Trajectory {
    std::vector<Real> times;
    std::vector<StateVector> states;
    /// expansions[n] is valid on [times[n], times[n+1]]; empty unless retained.
    std::vector<TaylorExpansion> expansions;

    const Real& end_time() const { return times.back(); }
    const StateVector& final_state() const { return states.back(); }
    std::size_t steps() const { return times.size() - 1; }
};

/// View of one accepted step passed to integration observers.
struct StepInfo {
    const Real& t_start;
    const Real& h;
    const TaylorExpansion& expansion;
    const StateVector& end_state;
};

using StepObserver = std::function<void(const StepInfo&)>;

/// Taylor coefficients c[0..K] of the solution through `state`, from the
/// automatic-differentiation recurrences of the equations of motion.
/// `step` is set to select_stepsize with the default safety factor.
TaylorExpansion taylor_coefficients(const StateVector& state, int order, double collision_threshold = 1e-6);

/// Step estimated from the last two coefficient norms.
/// Throws DegenerateSeries when both vanish.
Real select_stepsize(const TaylorExpansion& exp, double step_safety);

/// Horner evaluation of the expansion at offset h from its centre.
StateVector advance(const TaylorExpansion& exp, const Real& h);

/// Integrates from t = 0 to exactly `t_target`.
Trajectory integrate_to(const StateVector& state, const Real& t_target, const IntegratorConfig& cfg,
                        const StepObserver& observer = {});

/// Dense output from retained expansions.
StateVector dense_eval(const Trajectory& traj, const Real& t);

namespace detail {
class SeriesEngine;
}

/// Reusable stepper. Holds the series workspace so repeated integrations at
/// one configuration do not reallocate. Optionally carries `columns`
/// linearised (variational) vectors along with the state.
class TaylorPropagator {
public:
    TaylorPropagator(const IntegratorConfig& cfg, int columns = 0);
    ~TaylorPropagator();
    TaylorPropagator(TaylorPropagator&&) noexcept;
    TaylorPropagator& operator=(TaylorPropagator&&) noexcept;

    struct Result {
        StateVector state;
        std::vector<StateVector> columns;
        long steps = 0;
    };

    /// Advances state (and columns) from t = 0 to t_target. A target of zero
    /// returns the inputs unchanged.
    Result propagate(const StateVector& state, std::span<const StateVector> columns, const Real& t_target,
                     const StepObserver& observer = {});

    const IntegratorConfig& config() const { return cfg_; }

private:
    IntegratorConfig cfg_;
    int columns_;
    std::unique_ptr<detail::SeriesEngine> engine_;
};

}  // namespace choreo
