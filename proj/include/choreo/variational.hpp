#pragma once

#include "choreo/matrix.hpp"
#include "choreo/nbody.hpp"
#include "choreo/taylor.hpp"

#include <vector>

namespace choreo {

/// Base state plus linearised columns S with S' = J(X(t)) S.
struct SensitivityState {
    StateVector base;
    std::vector<StateVector> columns;
    long steps = 0;
};

/// Jacobian of the equations of motion, [[0, I], [G, 0]] with G the
/// Hessian of the pairwise potential.
Matrix jacobian(const StateVector& s, const Real& collision_threshold);
Matrix jacobian(const StateVector& s);

/// Propagates arbitrary columns alongside the state from t = 0.
SensitivityState integrate_linearized(const StateVector& state, const std::vector<StateVector>& columns,
                                      const Real& t_target, const IntegratorConfig& cfg,
                                      const StepObserver& observer = {});

/// dX(t)/dvx and dX(t)/dvy for the symmetric collinear start.
SensitivityState integrate_param_sensitivities(const Real& vx, const Real& vy, const Real& t_target,
                                               const IntegratorConfig& cfg);

/// dX(t)/dX(0) starting from the identity.
Matrix integrate_monodromy_to(const StateVector& state, const Real& t_target, const IntegratorConfig& cfg);

struct MonodromyResult {
    Matrix matrix;
    /// ||X(T) - X(0)||_2 of the same integration.
    Real residual;
    long steps = 0;
};

/// Monodromy matrix over one period of `solution`.
/// Throws NotPeriodic when the periodicity residual exceeds `residual_tolerance`.
MonodromyResult integrate_monodromy(const SearchTriplet& solution, const IntegratorConfig& cfg,
                                    const Real& residual_tolerance);

Matrix columns_to_matrix(const std::vector<StateVector>& columns);

}  // namespace choreo
