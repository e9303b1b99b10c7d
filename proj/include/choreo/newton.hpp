#pragma once

#include "choreo/matrix.hpp"
#include "choreo/nbody.hpp"
#include "choreo/taylor.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace choreo {

enum class NewtonMode { Modified, Classic };

std::string to_string(NewtonMode mode);
NewtonMode parse_newton_mode(std::string_view name);

struct NewtonConfig {
    NewtonMode mode = NewtonMode::Modified;
    double tau0 = 0.2;
    int maxiter = 50;
    /// Converged once R_k < tolerance; unset means the mode default for the preset.
    std::optional<Real> tolerance;
    IntegratorConfig integrator = IntegratorConfig::preset("desk");
    /// Iterates with T < 1 or T > 3 t0 are treated as divergent.
    double t0 = 300.0;

    /// Stage-2 defaults: damped Newton, 50 iterations, 1e-40 at 64 digits.
    static NewtonConfig modified(const IntegratorConfig& integrator);
    /// Undamped Newton with 10 iterations, tolerance 10^-(d - 2 guard).
    static NewtonConfig classic(const IntegratorConfig& integrator);

    Real effective_tolerance() const;
    void validate() const;
};

struct IterationRecord {
    int k = 0;
    Real residual;
    double tau = 1.0;
    Real dvx, dvy, dT;
};

struct LinearSystem {
    Matrix a;  // 12 x 3
    std::vector<Real> b;  // X(0) - X(T)
    Real residual;
    StateVector final_state;
};

struct Residual {
    Real norm;
    std::vector<Real> vec;  // X(0) - X(T)
};

/// Periodicity defect of the triplet at the integrator's precision.
Residual residual(const SearchTriplet& triplet, const IntegratorConfig& cfg);

/// Linearised periodicity system: columns dX(T)/dvx - dX(0)/dvx,
/// dX(T)/dvy - dX(0)/dvy and X'(T); right-hand side X(0) - X(T).
LinearSystem build_system(const SearchTriplet& triplet, const IntegratorConfig& cfg);

/// Least-squares solution of A x ~ b by Householder QR.
/// Throws RankDeficient when a diagonal entry of R is below 10^(-d+guard)
/// relative to the largest.
std::vector<Real> solve_least_squares(const Matrix& a, const std::vector<Real>& b);

/// Adaptive damping: min(1, tau R_prev/R_curr) on decrease, max(tau0, ...) otherwise.
double tau_update(double tau_prev, const Real& r_prev, const Real& r_curr, double tau0);

struct NewtonResult {
    bool converged = false;
    SearchTriplet triplet;
    std::vector<IterationRecord> trace;
    /// Why a divergent run stopped.
    std::string cause;
    /// Residual of the returned triplet when known.
    std::optional<Real> residual;
};

NewtonResult correct(const SearchTriplet& start, const NewtonConfig& cfg);

/// Fitted slope of log R_{k+1} against log R_k over the last three residuals
/// above `floor`; nullopt when fewer than three qualify.
std::optional<double> quadratic_slope(const std::vector<IterationRecord>& trace, const Real& floor);

struct PolishConfig {
    int digits_target = 180;
    IntegratorConfig primary = IntegratorConfig::preset("stage3a");
    IntegratorConfig verification = IntegratorConfig::preset("stage3b");
    int maxiter = 10;

    /// 180 digits maps to the stage3a/stage3b presets, any other target to
    /// target+20 and target+40 digits.
    static PolishConfig for_target(int digits_target);
    Real tolerance_for(const IntegratorConfig& integrator) const;
};

struct PolishResult {
    SearchTriplet triplet;
    SearchTriplet verification;
    NewtonResult primary_run;
    NewtonResult verification_run;
    /// Digits on which the two runs agree (minimum over vx, vy, T).
    int matched_digits = 0;
    std::optional<double> quadratic_slope;
};

/// Classic Newton at the primary precision, repeated at the verification
/// precision. Throws VerificationMismatch if the two disagree before
/// digits_target, NoConvergence if either run fails.
PolishResult polish(const SearchTriplet& triplet, const PolishConfig& cfg);

}  // namespace choreo
