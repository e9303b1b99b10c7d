#include "choreo/pipeline.hpp"

#include "choreo/errors.hpp"
#include "choreo/topology.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace choreo {

using nlohmann::json;
namespace fs = std::filesystem;

CandidateRecord CandidateRecord::from(const Candidate& c) {
    return {c.i, c.j, c.vx.to_string(c.vx.digits()), c.vy.to_string(c.vy.digits()), c.t_min.to_string(20),
            c.t_guess.to_string(20), c.r_value.to_string(12), c.cycle};
}

std::string CandidateRecord::id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "c%ld_%ld", i, j);
    return buf;
}

std::string to_json_line(const CandidateRecord& c) {
    json j;
    j["cell"] = {c.i, c.j};
    j["vx"] = c.vx;
    j["vy"] = c.vy;
    j["t_min"] = c.t_min;
    j["T_guess"] = c.t_guess;
    j["R"] = c.r_value;
    j["cycle"] = c.cycle;
    return j.dump();
}

CandidateRecord candidate_from_json_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        CandidateRecord c;
        c.i = j.at("cell").at(0).get<long>();
        c.j = j.at("cell").at(1).get<long>();
        c.vx = j.at("vx").get<std::string>();
        c.vy = j.at("vy").get<std::string>();
        c.t_min = j.at("t_min").get<std::string>();
        c.t_guess = j.at("T_guess").get<std::string>();
        c.r_value = j.at("R").get<std::string>();
        c.cycle = j.value("cycle", 1);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed candidate: ") + e.what());
    }
}

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void set_triplet(SolutionRecord& r, const SearchTriplet& t, int digits) {
    r.vx = t.vx.to_string(digits);
    r.vy = t.vy.to_string(digits);
    r.period = t.period.to_string(digits);
    r.t_star = compute_t_star(r.vx, r.vy, r.period);
}

}  // namespace

SolutionRecord refine_candidate(const CandidateRecord& c, const NewtonConfig& cfg) {
    const int d = cfg.integrator.digits;
    const SearchTriplet start{parse_decimal(c.vx).at_digits(d), parse_decimal(c.vy).at_digits(d),
                              parse_decimal(c.t_guess).at_digits(d)};
    const NewtonResult res = correct(start, cfg);
    if (!res.converged) throw NoConvergence("refinement of " + c.id() + " failed: " + res.cause);
    SolutionRecord r;
    r.id = c.id();
    r.cell = std::array<long, 2>{c.i, c.j};
    set_triplet(r, res.triplet, d);
    r.residual = res.residual ? res.residual->to_string(6) : res.trace.back().residual.to_string(6);
    r.presets["refine"] = cfg.integrator.name();
    r.timestamps["refine"] = utc_now();
    return r;
}

void polish_record(SolutionRecord& r, const PolishConfig& cfg) {
    const PolishResult res = polish(r.triplet(), cfg);
    set_triplet(r, res.triplet, cfg.primary.digits);
    r.residual = (res.primary_run.residual ? *res.primary_run.residual : res.primary_run.trace.back().residual)
                     .to_string(6);
    r.correct_digits = res.matched_digits;
    r.polish_tolerance = cfg.tolerance_for(cfg.primary).to_string(3);
    r.presets["polish_primary"] = cfg.primary.name();
    r.presets["polish_verification"] = cfg.verification.name();
    r.timestamps["polish"] = utc_now();
}

void stability_record(SolutionRecord& r, const CrossPrecisionOptions& opts) {
    const CrossPrecisionReport rep = verify_cross_precision(r.triplet(), opts);
    const EigenReport& e = rep.hi.report;
    StabilityData s;
    s.verdict = e.verdict;
    s.type = e.type;
    s.linearly_stable = e.linearly_stable;
    for (const auto& nu : e.angles) s.angles.push_back(nu.to_string(30));
    for (const auto& b : e.blocks) {
        if (b.kind == BlockKind::Hyperbolic && (!s.lambda || abs(b.re) > abs(parse_decimal(*s.lambda)))) {
            s.lambda = b.re.to_string(30);
        }
    }
    s.matched_digits = rep.min_matched;
    s.digits_lo = opts.digits_lo;
    s.digits_hi = opts.digits_hi;
    for (std::size_t i : e.nontrivial_indices) {
        s.eigenvalues.push_back({e.eigenvalues[i].re.to_string(40), e.eigenvalues[i].im.to_string(40)});
        s.conditions.push_back(e.eigenvalues[i].condition.to_string(6));
    }
    s.determinant_error = abs(rep.hi.determinant - 1L).to_string(3);
    r.stability = std::move(s);
    r.presets["stability"] = "d" + std::to_string(opts.digits_lo) + "/d" + std::to_string(opts.digits_hi);
    r.timestamps["stability"] = utc_now();
}

void classify_record(SolutionRecord& r, const ClassifyOptions& opts) {
    const SearchTriplet t = r.triplet();
    const FreeGroupWord word = read_word(syzygies_over_period(t, opts.word));
    r.word = word.canonical;
    const std::optional<int> k = satellite_power(word);
    if (k) {
        r.k = *k;
    } else {
        r.k.reset();
    }
    Real tol;
    if (opts.tolerance) {
        tol = *opts.tolerance;
    } else if (!r.polish_tolerance.empty()) {
        tol = sqrt(parse_decimal(r.polish_tolerance, opts.choreography.digits));
    } else {
        tol = pow10(-(opts.choreography.digits / 2), opts.choreography.digits);
    }
    // a word outside the satellite family is judged on the return test alone
    const ChoreographyVerdict v = choreography_check(t, k.value_or(1), opts.choreography, tol);
    r.choreography = v.choreography;
    r.choreography_proximity = v.proximity.to_string(3);
    r.presets["word"] = opts.word.name();
    r.presets["choreography"] = opts.choreography.name();
    r.timestamps["classify"] = utc_now();
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string number_text(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long>());
    if (j.is_number()) return j.dump();
    throw ConfigError("expected a number, got " + j.dump());
}

void check_preset(const std::string& name, const char* field) {
    try {
        IntegratorConfig::preset(name).validate();
    } catch (const Error& e) {
        throw ConfigError(std::string(field) + ": " + e.what());
    }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    static const std::set<std::string> known{"domain", "grid_step", "t0", "threshold", "presets", "refine",
                                             "polish", "stability", "output_dir", "workers", "plots"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    PipelineConfig c;
    try {
        if (j.contains("domain")) {
            const json& d = j["domain"];
            const auto vx = d.at("vx").get<std::array<double, 2>>();
            const auto vy = d.at("vy").get<std::array<double, 2>>();
            c.domain.vx_lo = vx[0];
            c.domain.vx_hi = vx[1];
            c.domain.vy_lo = vy[0];
            c.domain.vy_hi = vy[1];
            c.domain.mask = get_or(d, "mask", std::vector<std::array<double, 2>>{});
        }
        if (j.contains("grid_step")) c.domain.step = GridStep::parse(j["grid_step"].get<std::string>());
        if (j.contains("t0")) c.t0 = number_text(j["t0"]);
        c.threshold = get_or(j, "threshold", c.threshold);
        if (j.contains("presets")) {
            const json& p = j["presets"];
            c.scan_preset = get_or(p, "scan", c.scan_preset);
            c.refine_preset = get_or(p, "refine", c.refine_preset);
            c.polish_primary = get_or(p, "polish_primary", c.polish_primary);
            c.polish_verification = get_or(p, "polish_verification", c.polish_verification);
            c.word_preset = get_or(p, "word", c.word_preset);
        }
        if (j.contains("refine")) {
            const json& r = j["refine"];
            c.refine_mode = get_or(r, "mode", c.refine_mode);
            c.refine_maxiter = get_or(r, "maxiter", c.refine_maxiter);
            c.tau0 = get_or(r, "tau0", c.tau0);
        }
        if (j.contains("polish")) {
            const json& p = j["polish"];
            c.polish_digits = get_or(p, "digits", c.polish_digits);
            c.polish_maxiter = get_or(p, "maxiter", c.polish_maxiter);
        }
        if (j.contains("stability")) {
            const json& s = j["stability"];
            c.stability_lo = get_or(s, "digits_lo", c.stability_lo);
            c.stability_hi = get_or(s, "digits_hi", c.stability_hi);
            c.stability_required = get_or(s, "required_digits", c.stability_required);
        }
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        c.workers = get_or(j, "workers", c.workers);
        if (j.contains("plots")) {
            const json& p = j["plots"];
            c.plots = get_or(p, "enabled", c.plots);
            c.plot_resolution = get_or(p, "resolution", c.plot_resolution);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has the wrong shape: ") + e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    PipelineConfig c = from_json(ss.str());
    // a relative output directory is taken relative to the config file
    if (c.output_dir.is_relative()) c.output_dir = path.parent_path() / c.output_dir;
    return c;
}

std::string PipelineConfig::to_json() const {
    json j;
    j["domain"] = {{"vx", {domain.vx_lo, domain.vx_hi}}, {"vy", {domain.vy_lo, domain.vy_hi}}, {"mask", domain.mask}};
    j["grid_step"] = domain.step.to_string();
    j["t0"] = t0;
    j["threshold"] = threshold;
    j["presets"] = {{"scan", scan_preset},
                    {"refine", refine_preset},
                    {"polish_primary", polish_primary},
                    {"polish_verification", polish_verification},
                    {"word", word_preset}};
    j["refine"] = {{"mode", refine_mode}, {"maxiter", refine_maxiter}, {"tau0", tau0}};
    j["polish"] = {{"digits", polish_digits}, {"maxiter", polish_maxiter}};
    j["stability"] = {{"digits_lo", stability_lo}, {"digits_hi", stability_hi}, {"required_digits", stability_required}};
    j["output_dir"] = output_dir.string();
    j["workers"] = workers;
    j["plots"] = {{"enabled", plots}, {"resolution", plot_resolution}};
    return j.dump(2);
}

void PipelineConfig::validate() const {
    try {
        domain.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
    const Real t0v = parse_decimal(t0);
    if (t0v.sign() <= 0) throw ConfigError("t0 must be positive");
    if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
    check_preset(scan_preset, "presets.scan");
    check_preset(refine_preset, "presets.refine");
    check_preset(polish_primary, "presets.polish_primary");
    check_preset(polish_verification, "presets.polish_verification");
    check_preset(word_preset, "presets.word");
    parse_newton_mode(refine_mode);
    if (refine_maxiter < 1 || polish_maxiter < 1) throw ConfigError("maxiter must be positive");
    if (!(tau0 > 0.0 && tau0 <= 1.0)) throw ConfigError("refine.tau0 must lie in (0, 1]");
    const int dp = IntegratorConfig::preset(polish_primary).digits;
    const int dv = IntegratorConfig::preset(polish_verification).digits;
    if (polish_digits < 1) throw ConfigError("polish.digits must be positive");
    if (dp < polish_digits + kGuardDigits) {
        throw ConfigError("polish primary preset " + polish_primary + " cannot carry " + std::to_string(polish_digits) +
                          " digits plus guard digits");
    }
    if (dv <= dp) throw ConfigError("polish verification preset must be more precise than the primary one");
    if (stability_lo >= stability_hi) throw ConfigError("stability.digits_lo must be below digits_hi");
    if (stability_required < 1 || stability_required >= stability_lo) {
        throw ConfigError("stability.required_digits must be positive and below digits_lo");
    }
    if (stability_required + kGuardDigits > polish_digits) {
        throw ConfigError("polished orbits are not precise enough for the requested stability agreement");
    }
    if (workers < 0) throw ConfigError("workers must be non-negative");
    if (plot_resolution < 16) throw ConfigError("plots.resolution must be at least 16");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

NewtonConfig PipelineConfig::refine_config() const {
    const IntegratorConfig ic = IntegratorConfig::preset(refine_preset);
    NewtonConfig nc = parse_newton_mode(refine_mode) == NewtonMode::Modified ? NewtonConfig::modified(ic)
                                                                              : NewtonConfig::classic(ic);
    nc.maxiter = refine_maxiter;
    nc.tau0 = tau0;
    nc.t0 = parse_decimal(t0).to_double();
    return nc;
}

PolishConfig PipelineConfig::polish_config() const {
    PolishConfig pc;
    pc.digits_target = polish_digits;
    pc.primary = IntegratorConfig::preset(polish_primary);
    pc.verification = IntegratorConfig::preset(polish_verification);
    pc.maxiter = polish_maxiter;
    return pc;
}

CrossPrecisionOptions PipelineConfig::stability_options() const {
    CrossPrecisionOptions o;
    o.digits_lo = stability_lo;
    o.digits_hi = stability_hi;
    o.required_digits = stability_required;
    o.polish_digits = polish_digits;
    return o;
}

ClassifyOptions PipelineConfig::classify_options() const {
    ClassifyOptions o;
    o.word = IntegratorConfig::preset(word_preset);
    o.choreography = IntegratorConfig::preset(polish_primary);
    return o;
}

int PipelineConfig::effective_workers() const {
    if (std::getenv("CHOREO_WORKERS") || workers == 0) return default_worker_count();
    return workers;
}

DryRunReport dry_run(const PipelineConfig& cfg) {
    cfg.validate();
    DryRunReport r;
    r.grid_points = cfg.domain.grid_points().size();
    r.stages = {"scan", "refine", "polish", "stability", "classify", "deduplicate", "detect_pairs"};
    r.refine_preset = IntegratorConfig::preset(cfg.refine_preset).name();
    r.polish_primary = IntegratorConfig::preset(cfg.polish_primary).name();
    r.polish_verification = IntegratorConfig::preset(cfg.polish_verification).name();
    r.refine_tolerance = cfg.refine_config().effective_tolerance().to_string(3);
    const PolishConfig pc = cfg.polish_config();
    r.polish_tolerance = pc.tolerance_for(pc.primary).to_string(3);
    r.workers = cfg.effective_workers();
    return r;
}

std::string PipelineSummary::to_json() const {
    json j;
    j["grid_points"] = grid_points;
    j["candidates"] = candidates;
    j["refined"] = refined;
    j["polished"] = polished;
    j["stability_verified"] = stability_verified;
    j["classified"] = classified;
    j["choreographies"] = choreographies;
    j["linearly_stable"] = linearly_stable;
    j["distinct_choreographies"] = distinct_choreographies;
    j["distinct_linearly_stable"] = distinct_linearly_stable;
    j["conflicts"] = conflicts;
    j["pairs"] = pairs;
    j["failures"] = failures;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

/// Runs fn(i) for i in [0, n) on `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

void write_text(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Failure {
    std::string id;
    std::string cause;
};

void write_failures(const fs::path& path, const std::vector<Failure>& failures) {
    std::string text;
    for (const auto& f : failures) text += json{{"id", f.id}, {"cause", f.cause}}.dump() + "\n";
    write_text(path, text);
}

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) n += !line.empty();
    return n;
}

/// Applies `fn` to each input record in parallel, keeping order; failed
/// records are dropped (or kept unchanged when `keep_failed`) and logged.
std::vector<SolutionRecord> record_stage(const std::vector<SolutionRecord>& in, int workers, bool keep_failed,
                                         std::vector<Failure>& failures,
                                         const std::function<void(SolutionRecord&)>& fn, const PipelineLog& log,
                                         const std::string& stage) {
    std::vector<std::optional<SolutionRecord>> out(in.size());
    std::vector<std::optional<Failure>> failed(in.size());
    std::mutex log_mutex;
    parallel_for(in.size(), workers, [&](std::size_t i) {
        SolutionRecord r = in[i];
        try {
            fn(r);
            out[i] = std::move(r);
        } catch (const std::exception& e) {
            failed[i] = Failure{in[i].id, e.what()};
            if (keep_failed) out[i] = in[i];
            if (log) {
                std::lock_guard lock(log_mutex);
                log(stage + ": " + in[i].id + " failed: " + e.what());
            }
        }
    });
    std::vector<SolutionRecord> result;
    for (auto& r : out) {
        if (r) result.push_back(std::move(*r));
    }
    for (auto& f : failed) {
        if (f) failures.push_back(std::move(*f));
    }
    return result;
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& cfg, const PipelineLog& log) {
    cfg.validate();
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const int workers = cfg.effective_workers();
    auto say = [&](const std::string& s) {
        if (log) log(s);
    };

    // Stage files from a run with another configuration are discarded.
    static const std::vector<std::string> stage_files{
        "candidates.jsonl",        "scan_checkpoint.jsonl",   "refined.jsonl",           "refine_failures.jsonl",
        "polished.jsonl",          "polish_failures.jsonl",   "stability.jsonl",         "stability_failures.jsonl",
        "classified.jsonl",        "classify_failures.jsonl"};
    const fs::path cfg_path = dir / "config.json";
    const std::string cfg_text = cfg.to_json() + "\n";
    if (!fs::exists(cfg_path) || read_text(cfg_path) != cfg_text) {
        for (const auto& f : stage_files) fs::remove(dir / f);
        write_text(cfg_path, cfg_text);
    }

    PipelineSummary sum;
    sum.grid_points = cfg.domain.grid_points().size();

    // Stage 1: scan.
    std::vector<CandidateRecord> candidates;
    const fs::path cand_path = dir / "candidates.jsonl";
    if (fs::exists(cand_path)) {
        std::ifstream in(cand_path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) candidates.push_back(candidate_from_json_line(line));
        }
        say("scan: reusing " + std::to_string(candidates.size()) + " candidates");
    } else {
        ScanOptions so;
        so.integrator = IntegratorConfig::preset(cfg.scan_preset);
        so.t0 = Real(cfg.t0, so.integrator.digits);
        so.threshold = cfg.threshold;
        so.workers = workers;
        so.checkpoint = dir / "scan_checkpoint.jsonl";
        say("scan: " + std::to_string(sum.grid_points) + " grid points on " + std::to_string(workers) + " workers");
        std::string text;
        for (const auto& c : scan_domain(cfg.domain, so)) {
            candidates.push_back(CandidateRecord::from(c));
            text += to_json_line(candidates.back()) + "\n";
        }
        write_text(cand_path, text);
    }
    sum.candidates = candidates.size();

    // Stage 2: refine.
    const fs::path refined_path = dir / "refined.jsonl";
    std::vector<SolutionRecord> records;
    if (fs::exists(refined_path)) {
        records = read_records(refined_path);
    } else {
        say("refine: " + std::to_string(candidates.size()) + " candidates at " + cfg.refine_preset);
        const NewtonConfig nc = cfg.refine_config();
        std::vector<std::optional<SolutionRecord>> out(candidates.size());
        std::vector<std::optional<Failure>> failed(candidates.size());
        parallel_for(candidates.size(), workers, [&](std::size_t i) {
            try {
                out[i] = refine_candidate(candidates[i], nc);
            } catch (const std::exception& e) {
                failed[i] = Failure{candidates[i].id(), e.what()};
            }
        });
        std::vector<Failure> failures;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (out[i]) records.push_back(std::move(*out[i]));
            if (failed[i]) failures.push_back(std::move(*failed[i]));
        }
        write_failures(dir / "refine_failures.jsonl", failures);
        write_records(refined_path, records);
    }
    sum.refined = records.size();
    sum.failures["refine"] = count_lines(dir / "refine_failures.jsonl");

    struct Stage {
        std::string name;
        std::string file;
        bool keep_failed;
        std::function<void(SolutionRecord&)> fn;
    };
    const PolishConfig pc = cfg.polish_config();
    const CrossPrecisionOptions so = cfg.stability_options();
    const ClassifyOptions co = cfg.classify_options();
    const std::vector<Stage> stages{
        {"polish", "polished.jsonl", false, [&](SolutionRecord& r) { polish_record(r, pc); }},
        {"stability", "stability.jsonl", true, [&](SolutionRecord& r) { stability_record(r, so); }},
        {"classify", "classified.jsonl", false, [&](SolutionRecord& r) { classify_record(r, co); }},
    };
    for (const auto& st : stages) {
        const fs::path path = dir / st.file;
        if (fs::exists(path)) {
            records = read_records(path);
        } else {
            say(st.name + ": " + std::to_string(records.size()) + " records");
            std::vector<Failure> failures;
            records = record_stage(records, workers, st.keep_failed, failures, st.fn, log, st.name);
            write_failures(dir / (st.name + "_failures.jsonl"), failures);
            write_records(path, records);
        }
        sum.failures[st.name] = count_lines(dir / (st.name + "_failures.jsonl"));
        if (st.name == "polish") sum.polished = records.size();
        if (st.name == "classify") sum.classified = records.size();
    }
    for (const auto& r : records) sum.stability_verified += r.stability.has_value();

    // Deduplicate and pair up the choreographies.
    std::vector<SolutionRecord> db;
    for (const auto& r : records) {
        if (r.choreography.value_or(false)) db.push_back(r);
    }
    const DedupReport dd = deduplicate(db);
    sum.choreographies = dd.representations;
    sum.distinct_choreographies = dd.distinct;
    sum.conflicts = dd.conflicts.size();
    for (const auto& r : db) sum.linearly_stable += r.stability && r.stability->linearly_stable;
    for (const auto& g : dd.groups) {
        sum.distinct_linearly_stable += db[g.front()].stability && db[g.front()].stability->linearly_stable;
    }
    write_records(dir / "database.jsonl", db);

    // Pairs between distinct orbits only: one representative per group.
    std::vector<SolutionRecord> reps;
    for (const auto& g : dd.groups) reps.push_back(db[g.front()]);
    const auto pairs = detect_pairs(reps);
    sum.pairs = pairs.size();
    std::string pair_text;
    for (const auto& p : pairs) pair_text += to_json_line(p) + "\n";
    write_text(dir / "pairs.jsonl", pair_text);
    write_text(dir / "table.csv", export_csv(db));

    if (cfg.plots) {
        fs::create_directories(dir / "plots");
        PlotOptions po;
        po.resolution = cfg.plot_resolution;
        for (const auto& r : reps) {
            try {
                write_text(dir / "plots" / (r.id + ".svg"), plot_svg(r, po));
            } catch (const std::exception& e) {
                say("plot: " + r.id + " failed: " + e.what());
            }
        }
    }

    write_text(dir / "summary.json", sum.to_json() + "\n");
    say("done: " + std::to_string(sum.choreographies) + " choreographies, " + std::to_string(sum.distinct_choreographies) +
        " distinct, " + std::to_string(sum.distinct_linearly_stable) + " linearly stable");
    return sum;
}

}  // namespace choreo
