// Command-line front end: one subcommand per pipeline stage plus the full pipeline.

#include "choreo/database.hpp"
#include "choreo/errors.hpp"
#include "choreo/pipeline.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace choreo;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    for (const auto& l : lines) out << l << '\n';
}

/// Applies fn to each record of `in`, writing survivors to `out`. Returns the failure count.
int map_records(const std::string& in, const std::string& out, const std::function<void(SolutionRecord&)>& fn) {
    std::vector<SolutionRecord> done;
    int failed = 0;
    for (auto& r : read_records(in)) {
        try {
            fn(r);
            done.push_back(std::move(r));
            std::cerr << done.back().id << ": ok\n";
        } catch (const Error& e) {
            ++failed;
            std::cerr << r.id << ": " << e.what() << '\n';
        }
    }
    write_records(out, done);
    return failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Search, refine and classify planar three-body choreographies"};
    app.require_subcommand(1);

    // scan
    auto* scan = app.add_subcommand("scan", "Grid scan of the return proximity function");
    std::array<double, 2> vx_range{0.1, 0.33}, vy_range{0.49, 0.545};
    std::string step = "1/4096", t0 = "300", scan_preset = "scan", scan_out = "candidates.jsonl", checkpoint;
    double threshold = 0.1;
    int workers = 0;
    scan->add_option("--vx", vx_range, "vx range")->expected(2);
    scan->add_option("--vy", vy_range, "vy range")->expected(2);
    std::string domain_file;
    scan->add_option("--domain", domain_file, "JSON file with a domain object (and optionally grid_step)");
    scan->add_option("--step,--grid-step", step, "grid step p/q");
    scan->add_option("--t0", t0, "time horizon");
    scan->add_option("--preset", scan_preset, "integrator preset");
    scan->add_option("--threshold", threshold, "candidate threshold on R");
    scan->add_option("--workers", workers, "worker threads (0: CHOREO_WORKERS or all cores)");
    scan->add_option("--checkpoint", checkpoint, "per-point checkpoint file");
    scan->add_option("-o,--out", scan_out, "candidate file");

    // refine
    auto* refine = app.add_subcommand("refine", "Newton refinement of scan candidates");
    std::string refine_in, refine_out = "refined.jsonl", refine_preset = "stage1", mode = "modified";
    std::string tvx, tvy, tT;
    int maxiter = 0;
    refine->add_option("-i,--in", refine_in, "candidate file");
    refine->add_option("--vx", tvx, "single start: vx");
    refine->add_option("--vy", tvy, "single start: vy");
    refine->add_option("--T", tT, "single start: period");
    refine->add_option("--preset", refine_preset, "integrator preset");
    refine->add_option("--mode", mode, "modified or classic");
    refine->add_option("--maxiter", maxiter, "iteration limit (0: mode default)");
    refine->add_option("-o,--out", refine_out, "record file");

    // polish
    auto* pol = app.add_subcommand("polish", "Two-precision classic Newton");
    std::string pol_in, pol_out = "polished.jsonl", primary, verification;
    int pol_digits = 180;
    pol->add_option("-i,--in", pol_in, "record file")->required();
    pol->add_option("--digits", pol_digits, "target correct digits");
    pol->add_option("--primary", primary, "primary preset (default from --digits)");
    pol->add_option("--verification", verification, "verification preset (default from --digits)");
    pol->add_option("-o,--out", pol_out, "record file");

    // stability
    auto* stab = app.add_subcommand("stability", "Monodromy eigenvalues at two precisions");
    std::string stab_in, stab_out = "stability.jsonl";
    CrossPrecisionOptions cpo;
    stab->add_option("-i,--in", stab_in, "record file")->required();
    stab->add_option("--lo", cpo.digits_lo, "lower precision");
    stab->add_option("--hi", cpo.digits_hi, "higher precision");
    stab->add_option("--required", cpo.required_digits, "digits the two runs must share");
    stab->add_option("-o,--out", stab_out, "record file");

    // classify
    auto* cls = app.add_subcommand("classify", "Free-group word, satellite power and choreography test");
    std::string cls_in, cls_out = "classified.jsonl", word_preset = "scan", choreo_preset;
    cls->add_option("-i,--in", cls_in, "record file")->required();
    cls->add_option("--word-preset", word_preset, "preset for syzygy detection");
    cls->add_option("--choreography-preset", choreo_preset, "preset for the T/3 test (default: record precision)");
    cls->add_option("-o,--out", cls_out, "record file");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run every stage from a config file");
    std::string config;
    bool dry = false;
    pipe->add_option("--config", config, "JSON config")->required();
    pipe->add_flag("--dry-run", dry, "validate the config and size the scan only");

    // plot
    auto* plot = app.add_subcommand("plot", "SVG trajectory plots");
    std::string plot_in, plot_dir = "plots", plot_id;
    int resolution = 800;
    plot->add_option("-i,--in", plot_in, "record file")->required();
    plot->add_option("--id", plot_id, "only this record");
    plot->add_option("--resolution", resolution, "image size in pixels");
    plot->add_option("-o,--out-dir", plot_dir, "output directory");

    // export-csv
    auto* csv = app.add_subcommand("export-csv", "Table of N, vx, vy, T, T*, k");
    std::string csv_in, csv_out;
    int csv_digits = 18;
    csv->add_option("-i,--in", csv_in, "record file")->required();
    csv->add_option("--digits", csv_digits, "significant digits");
    csv->add_option("-o,--out", csv_out, "CSV file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*scan) {
            SearchDomain dom;
            if (!domain_file.empty()) {
                std::ifstream in(domain_file);
                if (!in) throw ConfigError("cannot open " + domain_file);
                std::stringstream text;
                text << in.rdbuf();
                dom = PipelineConfig::from_json(text.str()).domain;
            }
            if (domain_file.empty() || scan->count("--vx")) {
                dom.vx_lo = vx_range[0];
                dom.vx_hi = vx_range[1];
            }
            if (domain_file.empty() || scan->count("--vy")) {
                dom.vy_lo = vy_range[0];
                dom.vy_hi = vy_range[1];
            }
            if (domain_file.empty() || scan->count("--step")) dom.step = GridStep::parse(step);
            ScanOptions so;
            so.integrator = IntegratorConfig::preset(scan_preset);
            so.t0 = Real(t0, so.integrator.digits);
            so.threshold = threshold;
            so.workers = workers > 0 && !std::getenv("CHOREO_WORKERS") ? workers : default_worker_count();
            if (!checkpoint.empty()) so.checkpoint = checkpoint;
            std::vector<std::string> lines;
            for (const auto& c : scan_domain(dom, so)) lines.push_back(to_json_line(CandidateRecord::from(c)));
            write_lines(scan_out, lines);
            std::cerr << lines.size() << " candidates\n";
            return 0;
        }
        if (*refine) {
            NewtonConfig nc = parse_newton_mode(mode) == NewtonMode::Modified
                                  ? NewtonConfig::modified(IntegratorConfig::preset(refine_preset))
                                  : NewtonConfig::classic(IntegratorConfig::preset(refine_preset));
            if (maxiter > 0) nc.maxiter = maxiter;
            std::vector<CandidateRecord> cands;
            if (!tvx.empty()) {
                if (tvy.empty() || tT.empty()) throw ConfigError("--vx, --vy and --T go together");
                cands.push_back({0, 0, tvx, tvy, tT, tT, "0", 1});
            } else if (!refine_in.empty()) {
                for (const auto& l : read_lines(refine_in)) cands.push_back(candidate_from_json_line(l));
            } else {
                throw ConfigError("refine needs --in or a --vx/--vy/--T start");
            }
            std::vector<SolutionRecord> out;
            int failed = 0;
            for (const auto& c : cands) {
                nc.t0 = std::max(300.0, parse_decimal(c.t_guess).to_double());
                try {
                    out.push_back(refine_candidate(c, nc));
                    std::cerr << c.id() << ": T* = " << out.back().t_star.substr(0, 24) << '\n';
                } catch (const Error& e) {
                    ++failed;
                    std::cerr << c.id() << ": " << e.what() << '\n';
                }
            }
            write_records(refine_out, out);
            return failed ? 1 : 0;
        }
        if (*pol) {
            PolishConfig pc = PolishConfig::for_target(pol_digits);
            if (!primary.empty()) pc.primary = IntegratorConfig::preset(primary);
            if (!verification.empty()) pc.verification = IntegratorConfig::preset(verification);
            return map_records(pol_in, pol_out, [&](SolutionRecord& r) { polish_record(r, pc); }) ? 1 : 0;
        }
        if (*stab) {
            return map_records(stab_in, stab_out, [&](SolutionRecord& r) {
                       CrossPrecisionOptions o = cpo;
                       o.polish_digits = r.correct_digits > 0 ? r.correct_digits : r.digits();
                       stability_record(r, o);
                   })
                       ? 1
                       : 0;
        }
        if (*cls) {
            return map_records(cls_in, cls_out, [&](SolutionRecord& r) {
                       ClassifyOptions co;
                       co.word = IntegratorConfig::preset(word_preset);
                       co.choreography = choreo_preset.empty() ? IntegratorConfig::for_digits(r.digits())
                                                               : IntegratorConfig::preset(choreo_preset);
                       classify_record(r, co);
                   })
                       ? 1
                       : 0;
        }
        if (*pipe) {
            const PipelineConfig pc = PipelineConfig::load(config);
            if (dry) {
                const DryRunReport r = dry_run(pc);
                std::cout << "config ok: " << r.grid_points << " grid points, refine " << r.refine_preset << " (tol "
                          << r.refine_tolerance << "), polish " << r.polish_primary << '/' << r.polish_verification
                          << " (tol " << r.polish_tolerance << "), " << r.workers << " workers\n";
                return 0;
            }
            const PipelineSummary s = run_pipeline(pc, [](const std::string& m) { std::cerr << m << '\n'; });
            std::cout << s.to_json() << '\n';
            return 0;
        }
        if (*plot) {
            fs::create_directories(plot_dir);
            PlotOptions po;
            po.resolution = resolution;
            int n = 0;
            for (const auto& r : read_records(plot_in)) {
                if (!plot_id.empty() && r.id != plot_id) continue;
                std::ofstream(fs::path(plot_dir) / (r.id + ".svg")) << plot_svg(r, po);
                ++n;
            }
            if (n == 0) throw ConfigError("no matching record");
            return 0;
        }
        if (*csv) {
            const std::string text = export_csv(read_records(csv_in), csv_digits);
            if (csv_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream(csv_out) << text;
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
