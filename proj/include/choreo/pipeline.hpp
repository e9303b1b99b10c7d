#pragma once

#include "choreo/database.hpp"
#include "choreo/newton.hpp"
#include "choreo/scan.hpp"
#include "choreo/stability.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace choreo {

/// Scan candidate as stored between stages.
struct CandidateRecord {
    long i = 0, j = 0;
    std::string vx, vy, t_min, t_guess, r_value;
    int cycle = 1;

    static CandidateRecord from(const Candidate& c);
    std::string id() const;
};

std::string to_json_line(const CandidateRecord& c);
CandidateRecord candidate_from_json_line(const std::string& line);

/// Stage 2: damped Newton from the scan guess. Throws NoConvergence on failure.
SolutionRecord refine_candidate(const CandidateRecord& c, const NewtonConfig& cfg);

/// Stage 3: two-precision classic Newton. Replaces the record's triplet with
/// the primary run's values and recomputes T*.
void polish_record(SolutionRecord& r, const PolishConfig& cfg);

void stability_record(SolutionRecord& r, const CrossPrecisionOptions& opts);

struct ClassifyOptions {
    /// Precision of the syzygy pass.
    IntegratorConfig word = IntegratorConfig::preset("scan");
    /// Precision of the T/3 return check.
    IntegratorConfig choreography = IntegratorConfig::preset("desk");
    /// Return tolerance; unset takes the square root of the record's polish tolerance.
    std::optional<Real> tolerance;
};

/// Word, satellite power and choreography test.
void classify_record(SolutionRecord& r, const ClassifyOptions& opts);

struct PipelineConfig {
    SearchDomain domain;
    std::string t0 = "300";
    double threshold = 0.1;
    std::string scan_preset = "scan";
    std::string refine_preset = "stage1";
    std::string refine_mode = "modified";
    int refine_maxiter = 50;
    double tau0 = 0.2;
    int polish_digits = 180;
    std::string polish_primary = "stage3a";
    std::string polish_verification = "stage3b";
    int polish_maxiter = 10;
    int stability_lo = 80;
    int stability_hi = 130;
    int stability_required = 30;
    std::string word_preset = "scan";
    std::filesystem::path output_dir = "choreo-out";
    /// Zero means CHOREO_WORKERS or the hardware concurrency.
    int workers = 0;
    bool plots = true;
    int plot_resolution = 800;

    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    std::string to_json() const;

    /// Throws ConfigError for inconsistent settings.
    void validate() const;

    NewtonConfig refine_config() const;
    PolishConfig polish_config() const;
    CrossPrecisionOptions stability_options() const;
    ClassifyOptions classify_options() const;
    /// CHOREO_WORKERS wins over the config value.
    int effective_workers() const;
};

struct DryRunReport {
    std::size_t grid_points = 0;
    std::vector<std::string> stages;
    std::string refine_preset, polish_primary, polish_verification;
    std::string refine_tolerance, polish_tolerance;
    int workers = 1;
};

/// Validates the configuration and sizes the scan without integrating.
DryRunReport dry_run(const PipelineConfig& cfg);

struct PipelineSummary {
    std::size_t grid_points = 0;
    std::size_t candidates = 0;
    std::size_t refined = 0;
    std::size_t polished = 0;
    std::size_t stability_verified = 0;
    std::size_t classified = 0;
    /// Counting every initial condition as a solution.
    std::size_t choreographies = 0;
    std::size_t linearly_stable = 0;
    /// Counting each orbit once.
    std::size_t distinct_choreographies = 0;
    std::size_t distinct_linearly_stable = 0;
    std::size_t conflicts = 0;
    std::size_t pairs = 0;
    std::map<std::string, std::size_t> failures;

    std::string to_json() const;
};

using PipelineLog = std::function<void(const std::string&)>;

/// Runs every stage, reusing stage files already present in the output
/// directory for the same configuration. Per-candidate failures are written
/// to <stage>_failures.jsonl and do not stop the run.
PipelineSummary run_pipeline(const PipelineConfig& cfg, const PipelineLog& log = {});

}  // namespace choreo
