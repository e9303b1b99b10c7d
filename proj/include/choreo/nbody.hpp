#pragma once

#include "choreo/real.hpp"

#include <array>
#include <cstddef>

namespace choreo {

inline constexpr std::size_t kDim = 12;
inline constexpr int kGuardDigits = 10;

/// Phase-space point (x1,y1,x2,y2,x3,y3,vx1,vy1,vx2,vy2,vx3,vy3).
using StateVector = std::array<Real, kDim>;

/// Index helpers into StateVector.
constexpr std::size_t pos_x(int body) { return static_cast<std::size_t>(2 * body); }
constexpr std::size_t pos_y(int body) { return static_cast<std::size_t>(2 * body + 1); }
constexpr std::size_t vel_x(int body) { return static_cast<std::size_t>(6 + 2 * body); }
constexpr std::size_t vel_y(int body) { return static_cast<std::size_t>(7 + 2 * body); }

/// Body pairs (i, j) with i < j, in the order used throughout the library.
inline constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

struct SearchTriplet {
    Real vx;
    Real vy;
    Real period;
};

struct ConservedQuantities {
    Real energy;
    Real angular_momentum;
    Real momentum_x;
    Real momentum_y;
};

StateVector make_state(int digits);
StateVector state_at_digits(const StateVector& s, int digits);

/// Symmetric collinear start: bodies at (-1,0), (1,0), (0,0); the outer two
/// move with (vx, vy) and the middle one with (-2vx, -2vy).
StateVector build_initial_state(const Real& vx, const Real& vy);

/// Derivative of the partial state with respect to (vx, vy) at t = 0.
StateVector initial_state_derivative_vx(int digits);
StateVector initial_state_derivative_vy(int digits);

/// Pairwise distance below which a state counts as a collision.
Real default_collision_threshold(int digits);

/// First-order equations of motion with unit masses and G = 1.
/// Throws CollisionError when a pairwise distance is below `collision_threshold`.
StateVector rhs(const StateVector& s, const Real& collision_threshold);
StateVector rhs(const StateVector& s);

Real kinetic_energy(const StateVector& s);
Real energy(const StateVector& s, const Real& collision_threshold);
Real energy(const StateVector& s);
Real angular_momentum(const StateVector& s);
std::array<Real, 2> linear_momentum(const StateVector& s);
ConservedQuantities conserved_quantities(const StateVector& s);

/// Energy of build_initial_state(vx, vy): -5/2 + 3(vx^2 + vy^2).
Real initial_energy(const Real& vx, const Real& vy);

/// T |E|^{3/2}; invariant under the scaling symmetry of the problem.
/// Throws ZeroEnergy when |E| is below 10^(-d+guard).
Real scale_invariant_period(const Real& period, const Real& vx, const Real& vy);

Real norm2(const StateVector& s);
Real distance2(const StateVector& a, const StateVector& b);

}  // namespace choreo
