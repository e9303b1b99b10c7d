#pragma once

#include "choreo/nbody.hpp"
#include "choreo/taylor.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace choreo {

/// Parses a decimal string at a precision covering all of its digits.
Real parse_decimal(std::string_view text, int min_digits = 16);

struct StabilityData {
    std::string verdict;
    std::string type;
    bool linearly_stable = false;
    /// Elliptic angles, largest first, 30 significant digits.
    std::vector<std::string> angles;
    /// Largest real eigenvalue above 1 for hyperbolic blocks.
    std::optional<std::string> lambda;
    int matched_digits = 0;
    int digits_lo = 0, digits_hi = 0;
    /// [re, im] pairs of the high-precision run.
    std::vector<std::array<std::string, 2>> eigenvalues;
    std::vector<std::string> conditions;
    std::string determinant_error;
};

struct SolutionRecord {
    std::string id;
    std::string vx, vy, period, t_star;
    std::string residual;
    /// Digits on which the two polish precisions agree.
    int correct_digits = 0;
    std::string polish_tolerance;
    std::optional<int> k;
    std::string word;
    std::optional<bool> choreography;
    std::optional<std::string> choreography_proximity;
    std::optional<StabilityData> stability;
    /// Stage name to integrator preset.
    std::map<std::string, std::string> presets;
    /// Grid cell of the originating scan candidate.
    std::optional<std::array<long, 2>> cell;
    /// Stage name to completion time (UTC, ISO 8601).
    std::map<std::string, std::string> timestamps;
    /// Ids of other representations of the same orbit.
    std::vector<std::string> duplicates;
    std::vector<std::string> conflicts;

    SearchTriplet triplet() const;
    int digits() const;
};

/// T* string for the record's own (vx, vy, T) at their precision.
std::string compute_t_star(const std::string& vx, const std::string& vy, const std::string& period);

std::string to_json_line(const SolutionRecord& r);
SolutionRecord record_from_json_line(const std::string& line);
std::vector<SolutionRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<SolutionRecord>& records);

struct DedupReport {
    /// Groups of record indices that represent one orbit.
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::pair<std::size_t, std::size_t>> conflicts;
    std::size_t representations = 0;
    std::size_t distinct = 0;
};

/// Links records whose T* agree to `digits` significant digits and share k;
/// equal T* with different k is flagged as a conflict instead.
DedupReport deduplicate(std::vector<SolutionRecord>& records, int digits = 30);

struct PairThresholds {
    double t_star_relative = 1e-6;
    double nu_gap = 1e-4;
    double small_nu = 1e-3;
    double lambda_excess = 1e-3;
};

struct PairRecord {
    std::string stable_id, hyperbolic_id;
    int k = 0;
    double t_star_gap = 0.0;      // |dT*| / T*
    double nu_gap = 0.0;          // |nu_1(stable) - nu(hyperbolic-elliptic)|
    double small_nu = 0.0;        // nu_2 of the stable member
    double lambda_excess = 0.0;   // lambda - 1 of the hyperbolic member
};

/// Stable / hyperbolic-elliptic pairs with the same k and nearly equal T*.
std::vector<PairRecord> detect_pairs(const std::vector<SolutionRecord>& records, const PairThresholds& th = {});

std::string to_json_line(const PairRecord& p);

struct PlotOptions {
    int resolution = 800;
    IntegratorConfig integrator = IntegratorConfig::preset("scan");
};

/// SVG of the three paths over one period, sampled so consecutive points are
/// less than a pixel apart.
std::string plot_svg(const SolutionRecord& record, const PlotOptions& opts = {});

/// N, vx, vy, T, T*, k with `digits` significant digits.
std::string export_csv(const std::vector<SolutionRecord>& records, int digits = 18);

}  // namespace choreo
