#pragma once

#include "choreo/matrix.hpp"
#include "choreo/nbody.hpp"
#include "choreo/taylor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace choreo {

struct Eigenvalue {
    Real re;
    Real im;
    /// ||x|| ||y|| / |y^H x| for unit left/right eigenvectors; diagnostic only.
    Real condition;

    Real modulus() const;
};

/// All eigenvalues of a real square matrix: balancing, Hessenberg
/// reduction and Francis double-shift QR at the matrix precision.
/// Throws NoConvergence when the sweep budget is exhausted.
std::vector<Eigenvalue> eigenvalues(const Matrix& m);

enum class BlockKind { Elliptic, Marginal, Hyperbolic, Loxodromic };
std::string to_string(BlockKind kind);

/// One reciprocal/conjugate family among the nontrivial eigenvalues.
struct EigenBlock {
    BlockKind kind;
    /// Representative: Im > 0 for elliptic, |lambda| > 1 otherwise.
    Real re, im;
    /// Stability angle in (0, 1/2] for elliptic blocks.
    std::optional<Real> nu;
    /// log|lambda| for hyperbolic and loxodromic blocks.
    std::optional<Real> mu;
    int sign = 1;
};

struct EigenReport {
    int digits = 0;
    std::vector<Eigenvalue> eigenvalues;
    std::vector<std::size_t> unit_indices;
    std::vector<std::size_t> nontrivial_indices;
    std::vector<EigenBlock> blocks;
    /// Elliptic angles, largest first.
    std::vector<Real> angles;
    bool linearly_stable = false;
    /// Block kinds joined by '-', e.g. "elliptic-elliptic", "hyperbolic-elliptic".
    std::string type;
    std::string verdict;
};

/// 10^(-digits/4), the unit-eigenvalue and unit-circle tolerance.
Real stability_tolerance(int digits);

/// Splits off the eight eigenvalues nearest 1 and classifies the rest.
/// Throws UnitCountMismatch when fewer than eight lie within `tolerance` of 1.
EigenReport classify(const std::vector<Eigenvalue>& eigs, const Real& tolerance);
EigenReport classify(const std::vector<Eigenvalue>& eigs);

struct MonodromyAnalysis {
    int digits = 0;
    Matrix monodromy;
    Real determinant;
    Real residual;
    EigenReport report;
};

/// Monodromy over one period at `cfg`, its eigenvalues and classification
/// with the given unit-eigenvalue tolerance.
MonodromyAnalysis analyse_monodromy(const SearchTriplet& solution, const IntegratorConfig& cfg,
                                    const Real& residual_tolerance, const Real& unit_tolerance);

struct CrossPrecisionOptions {
    int digits_lo = 80;
    int digits_hi = 130;
    int required_digits = 30;
    /// Precision the orbit was polished at; sets the unit-eigenvalue
    /// tolerance. Zero takes the precision of the solution's period.
    int polish_digits = 0;
};

struct CrossPrecisionReport {
    MonodromyAnalysis lo;
    MonodromyAnalysis hi;
    /// Per nontrivial eigenvalue of the high-precision run.
    std::vector<int> matched_digits;
    std::vector<int> condition_digits;
    int min_matched = 0;
};

/// Runs the monodromy and eigenvalue pipeline at two precisions and accepts
/// when every nontrivial eigenvalue agrees to `required_digits` and the
/// condition numbers agree in their leading digit. Throws VerificationFailed
/// otherwise, and also when the orbit's own residual is too large to support
/// that agreement.
CrossPrecisionReport verify_cross_precision(const SearchTriplet& solution, const CrossPrecisionOptions& opts = {});

}  // namespace choreo
