#pragma once

#include "choreo/nbody.hpp"
#include "choreo/taylor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace choreo {

/// A collinear instant.
struct Syzygy {
    Real t;
    /// 1-based index of the body between the other two.
    int middle_body = 0;
    /// Sign of the oriented area (r2 - r1) x (r3 - r1) just before the zero.
    int crossing_sign = 0;
};

/// Oriented triangle area (r2 - r1) x (r3 - r1) and its time derivative.
Real oriented_area(const StateVector& s);
Real oriented_area_rate(const StateVector& s);

/// Body (1-based) lying between the other two in a collinear configuration.
int middle_body(const StateVector& s);

struct SyzygyOptions {
    /// Sign samples per integration step before bisection.
    int samples_per_step = 16;
    /// Bisection stops once the bracket is shorter than 10^-t_digits.
    int t_digits = 20;
    /// |dA/dt| below this marks a tangential, unreadable syzygy.
    double tangent_threshold = 1e-10;
};

/// Streaming detector fed one integration step at a time. Zeros within
/// 1e-8 of either end of [0, end] are left to the caller: a collinear start
/// is reported once, as the first entry, with the sign it had just before t = 0.
class SyzygyDetector {
public:
    SyzygyDetector(const Real& end_time, SyzygyOptions opts = {});

    void add_step(const Real& t_start, const Real& h, const TaylorExpansion& exp);
    /// Registers the initial state; must precede the first step.
    void start(const StateVector& initial);

    const std::vector<Syzygy>& syzygies() const { return found_; }

private:
    Real end_;
    Real margin_;
    SyzygyOptions opts_;
    std::vector<Syzygy> found_;
};

/// Syzygies of a trajectory covering exactly one period; needs retained expansions.
/// Throws DegenerateSyzygy for a tangential zero.
std::vector<Syzygy> detect_syzygies(const Trajectory& traj, const SyzygyOptions& opts = {});

/// Integrates one period of the triplet and collects its syzygies without
/// retaining the trajectory.
std::vector<Syzygy> syzygies_over_period(const SearchTriplet& triplet, const IntegratorConfig& cfg,
                                         const SyzygyOptions& opts = {});

/// Element of the free group on a, b with inverses A, B.
struct FreeGroupWord {
    std::string letters;    // as read
    std::string reduced;    // freely reduced
    std::string canonical;  // least rotation of the cyclic reduction, order a < b < A < B
};

std::string free_reduce(std::string_view word);
std::string cyclic_reduce(std::string_view word);
std::string canonical_rotation(std::string_view word);

/// Throws EmptyWord when the letters cancel completely.
FreeGroupWord make_word(std::string_view letters);

/// Middle body 1 gives a/A, middle body 2 gives b/B, middle body 3 no letter.
FreeGroupWord read_word(const std::vector<Syzygy>& syzygies);

/// k with canonical(word) = canonical((abAB)^k), if any.
std::optional<int> satellite_power(const FreeGroupWord& word);

struct ChoreographyVerdict {
    bool choreography = false;
    bool power_not_divisible_by_3 = false;
    bool returns_at_third = false;
    /// ||P X(T/3) - X(0)|| minimised over both 3-cycles.
    Real proximity;
    int cycle = 1;
};

ChoreographyVerdict choreography_check(const SearchTriplet& solution, int k, const IntegratorConfig& cfg,
                                       const Real& tolerance);

}  // namespace choreo
