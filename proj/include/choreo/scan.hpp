#pragma once

#include "choreo/nbody.hpp"
#include "choreo/taylor.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace choreo {

/// Body 1 takes body 2's slots, 2 takes 3's and 3 takes 1's.
StateVector cyclic_permute(const StateVector& s);

/// Rational grid spacing p/q.
struct GridStep {
    long num = 1;
    long den = 4096;

    static GridStep parse(std::string_view text);
    std::string to_string() const;
    Real value(int digits) const;
};

/// Rectangle in (vx, vy), optionally united with a polygon for the
/// non-rectangular part of the search region.
struct SearchDomain {
    double vx_lo = 0.1, vx_hi = 0.33;
    double vy_lo = 0.49, vy_hi = 0.545;
    std::vector<std::array<double, 2>> mask;
    GridStep step;

    void validate() const;
    bool contains(double vx, double vy) const;

    /// Grid indices (i, j) with v = (i, j) * step inside the domain, ordered by (i, j).
    std::vector<std::array<long, 2>> grid_points() const;
};

struct ProximityResult {
    /// +inf when the integration hit a collision.
    Real r_min;
    Real t_min;
    /// 1 for the 1<-2<-3<-1 cycle, 2 for its inverse.
    int cycle = 1;
    bool collided = false;
};

/// Distance between the relabelled state and the start, minimised over the
/// two 3-cycles; returns the distance and the cycle that attains it.
std::pair<Real, int> permuted_distance(const StateVector& state, const StateVector& start);

struct ProximityOptions {
    /// Golden-section tolerance on t.
    double t_tolerance = 1e-6;
    /// Near-returns repeat at every multiple of T/3; the earliest local
    /// minimum below this level is reported instead of the global one.
    double accept_below = 0.1;
};

/// Minimum over 1 < t <= t0 of the permuted return distance, located at step
/// endpoints and refined on the dense output of the neighbouring steps.
/// Returns the earliest refined local minimum below opts.accept_below when
/// there is one, otherwise the global minimum.
ProximityResult return_proximity(const Real& vx, const Real& vy, const Real& t0, const IntegratorConfig& cfg,
                                 const ProximityOptions& opts = {});

struct Candidate {
    long i = 0, j = 0;
    Real vx, vy;
    Real t_min;
    Real t_guess;
    Real r_value;
    int cycle = 1;
};

struct GridValue {
    long i = 0, j = 0;
    double r = 0.0;  // +inf on collision
    std::string r_text;
    std::string t_text;
    int cycle = 1;
};

struct ScanOptions {
    Real t0 = Real(300L, 32);
    IntegratorConfig integrator = IntegratorConfig::preset("scan");
    double threshold = 0.1;
    int workers = 1;
    /// Append-only per-point log; existing entries are reused on restart.
    std::optional<std::filesystem::path> checkpoint;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Evaluates every grid point (in parallel) and returns strict 8-neighbour
/// local minima of R below the threshold, ordered by (i, j).
std::vector<Candidate> scan_domain(const SearchDomain& domain, const ScanOptions& opts);

/// Local-minimum filter over already evaluated grid values.
std::vector<std::size_t> local_minima(const std::vector<GridValue>& values, double threshold);

/// Worker count from CHOREO_WORKERS, else hardware concurrency.
int default_worker_count();

}  // namespace choreo
