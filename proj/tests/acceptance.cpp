// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria
//   acceptance 7 8 9      a subset
//
// Criteria 4 to 6 reuse the stage-1 refinements of criteria 2 and 3, which
// are computed on first use.

#include "choreo/database.hpp"
#include "choreo/errors.hpp"
#include "choreo/newton.hpp"
#include "choreo/pipeline.hpp"
#include "choreo/scan.hpp"
#include "choreo/stability.hpp"
#include "choreo/topology.hpp"

#include "fixtures.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

using namespace choreo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// ---------------------------------------------------------------------------
// Independent double-precision check: classical RK4 on the same equations.

using State6 = std::array<double, 12>;

State6 rhs_double(const State6& s) {
    State6 d{};
    for (int i = 0; i < 6; ++i) d[i] = s[6 + i];
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            const double dx = s[2 * b] - s[2 * a], dy = s[2 * b + 1] - s[2 * a + 1];
            const double r2 = dx * dx + dy * dy;
            const double inv = 1.0 / (r2 * std::sqrt(r2));
            d[6 + 2 * a] += dx * inv;
            d[7 + 2 * a] += dy * inv;
        }
    }
    return d;
}

State6 rk4(State6 s, double t, int steps) {
    const double h = t / steps;
    auto axpy = [](const State6& x, double a, const State6& y) {
        State6 r;
        for (int i = 0; i < 12; ++i) r[i] = x[i] + a * y[i];
        return r;
    };
    for (int n = 0; n < steps; ++n) {
        const State6 k1 = rhs_double(s);
        const State6 k2 = rhs_double(axpy(s, h / 2, k1));
        const State6 k3 = rhs_double(axpy(s, h / 2, k2));
        const State6 k4 = rhs_double(axpy(s, h, k3));
        for (int i = 0; i < 12; ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return s;
}

State6 start_double(double vx, double vy) {
    return {-1, 0, 1, 0, 0, 0, vx, vy, vx, vy, -2 * vx, -2 * vy};
}

// Smallest distance from `s` to `ref` over the two cyclic relabellings and the identity.
double relabelled_distance(const State6& s, const State6& ref) {
    double best = 1e300;
    for (int shift = 0; shift < 3; ++shift) {
        double d2 = 0.0;
        for (int b = 0; b < 3; ++b) {
            const int src = (b + shift) % 3;
            for (int c = 0; c < 2; ++c) {
                d2 += std::pow(s[2 * src + c] - ref[2 * b + c], 2);
                d2 += std::pow(s[6 + 2 * src + c] - ref[6 + 2 * b + c], 2);
            }
        }
        best = std::min(best, std::sqrt(d2));
    }
    return best;
}

// ---------------------------------------------------------------------------

struct Refinement {
    NewtonResult run;
    double seconds = 0.0;
};

const IntegratorConfig& stage1() {
    static const IntegratorConfig cfg = IntegratorConfig::preset("stage1");
    return cfg;
}

const Refinement& refine_row(int row) {
    static std::optional<Refinement> r119, r120;
    auto& slot = row == 119 ? r119 : r120;
    if (!slot) {
        const SearchTriplet start = row == 119 ? fixtures::row119(stage1().digits) : fixtures::row120(stage1().digits);
        const auto t0 = Clock::now();
        Refinement r;
        r.run = correct(start, NewtonConfig::classic(stage1()));
        r.seconds = seconds_since(t0);
        slot = std::move(r);
    }
    return *slot;
}

const CrossPrecisionReport& cross_precision(int row) {
    static std::optional<CrossPrecisionReport> c119, c120;
    auto& slot = row == 119 ? c119 : c120;
    if (!slot) {
        const Refinement& r = refine_row(row);
        if (!r.run.converged) throw NoConvergence("stage-1 refinement of row " + std::to_string(row) + " failed");
        slot = verify_cross_precision(r.run.triplet, CrossPrecisionOptions{80, 130, 30, stage1().digits});
    }
    return *slot;
}

std::string describe_refinement(int row, const Refinement& r) {
    std::ostringstream os;
    os << "row " << row << ": " << r.run.trace.size() << " iterations, " << fmt("%.0f s", r.seconds);
    if (r.run.residual) os << ", residual " << r.run.residual->to_string(3);
    return os.str();
}

Outcome reproduce_t_star(int row, const char* published) {
    const Refinement& r = refine_row(row);
    if (!r.run.converged) return {false, describe_refinement(row, r) + ", no convergence: " + r.run.cause};
    const SearchTriplet& t = r.run.triplet;
    const Real t_star = scale_invariant_period(t.period, t.vx, t.vy);
    const Real want = parse_decimal(published, t_star.digits());
    // all published digits must survive rounding of the recomputed value
    const int sig = static_cast<int>(std::string(published).size()) - 1;
    const bool same = t_star.to_string(sig) == want.to_string(sig);
    std::ostringstream os;
    os << describe_refinement(row, r) << ", T* = " << t_star.to_fixed_string(24) << " vs " << published
       << " (" << matching_digits(t_star, want) << " digits)";
    return {same, os.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const auto t0 = Clock::now();
    const auto dir = std::filesystem::temp_directory_path() / "choreo_acceptance_desk";
    std::filesystem::remove_all(dir);
    PipelineConfig cfg = PipelineConfig::load(std::filesystem::path(CHOREO_SOURCE_DIR) / "configs" / "desk.json");
    cfg.output_dir = dir;
    cfg.workers = 1;
    const PipelineSummary sum = run_pipeline(cfg);
    const double elapsed = seconds_since(t0);

    std::vector<std::string> problems;
    bool near_return = false;
    {
        std::ifstream in(dir / "candidates.jsonl");
        for (std::string line; std::getline(in, line);) {
            if (line.empty()) continue;
            const CandidateRecord c = candidate_from_json_line(line);
            const double r = parse_decimal(c.r_value).to_double(), tm = parse_decimal(c.t_min).to_double();
            near_return = near_return || (r < 0.1 && tm > 2.0 && tm < 2.2);
        }
    }
    if (!near_return) problems.push_back("no candidate with R < 0.1 and t_min in (2.0, 2.2)");

    const auto refined = read_records(dir / "refined.jsonl");
    if (refined.empty()) problems.push_back("modified Newton converged for no candidate");

    const auto database = read_records(dir / "database.jsonl");
    const SolutionRecord* fe = nullptr;
    for (const auto& r : database) {
        if (r.word == "abAB" && r.k == 1) {
            fe = &r;
            break;
        }
    }
    std::ostringstream os;
    if (!fe) {
        problems.push_back("no abAB record with k = 1 in the database");
    } else {
        const Real res = parse_decimal(fe->residual);
        if (!(res < pow10(-50, 64))) problems.push_back("polish residual " + fe->residual);
        if (fe->choreography != true) problems.push_back("not classified as a choreography");
        if (!fe->stability || !fe->stability->linearly_stable) problems.push_back("not linearly stable");

        // independent integrator: RK4 in double over one period and a third of it
        const double vx = parse_decimal(fe->vx).to_double(), vy = parse_decimal(fe->vy).to_double();
        const double period = parse_decimal(fe->period).to_double();
        const State6 x0 = start_double(vx, vy);
        const double full = relabelled_distance(rk4(x0, period, 60000), x0);
        const double third = relabelled_distance(rk4(x0, period / 3, 20000), x0);
        if (!(full < 1e-8 && third < 1e-8)) problems.push_back("RK4 return " + fmt("%.2e", std::max(full, third)));
        os << fe->id << " T = " << parse_decimal(fe->period).to_string(12) << ", residual " << fe->residual
           << ", RK4 return " << fmt("%.1e", std::max(full, third)) << "; ";
    }
    if (elapsed >= 300.0) problems.push_back("took " + fmt("%.0f s", elapsed));
    os << sum.distinct_choreographies << " distinct choreography, " << fmt("%.0f s", elapsed);
    for (const auto& p : problems) os << "; " << p;
    std::filesystem::remove_all(dir);
    return {problems.empty(), os.str()};
}

Outcome criterion2() {
    Outcome o = reproduce_t_star(119, fixtures::kRow119TStar);
    if (refine_row(119).seconds > 3600.0) {
        o.pass = false;
        o.detail += ", over the 60 min budget";
    }
    return o;
}

Outcome criterion3() {
    Outcome o = reproduce_t_star(120, fixtures::kRow120TStar);
    const Refinement& r = refine_row(120);
    if (!r.run.converged) return o;
    const IntegratorConfig scan = IntegratorConfig::preset("scan");
    const SearchTriplet& t = r.run.triplet;
    const SearchTriplet low{t.vx.at_digits(scan.digits), t.vy.at_digits(scan.digits), t.period.at_digits(scan.digits)};
    const auto syz = syzygies_over_period(low, scan);
    const auto k = satellite_power(read_word(syz));
    o.detail += ", " + std::to_string(syz.size()) + " syzygies, k = " + (k ? std::to_string(*k) : "none");
    o.pass = o.pass && k == 65;
    return o;
}

Outcome criterion4() {
    const CrossPrecisionReport& a = cross_precision(119);
    const CrossPrecisionReport& b = cross_precision(120);
    std::vector<std::string> problems;
    auto check = [&](const std::string& what, const Real& got, const char* want) {
        const int m = matching_digits(got, parse_decimal(want));
        if (m < 20) problems.push_back(what + " matches " + std::to_string(m) + " digits");
        return m;
    };
    std::ostringstream os;
    const auto& ra = a.hi.report;
    const auto& rb = b.hi.report;
    if (ra.angles.size() != 2) problems.push_back("row 119 has " + std::to_string(ra.angles.size()) + " angles");
    if (rb.angles.size() != 1) problems.push_back("row 120 has " + std::to_string(rb.angles.size()) + " angles");
    std::optional<Real> lambda;
    for (const auto& blk : rb.blocks) {
        if (blk.kind == BlockKind::Hyperbolic) lambda = abs(blk.re) > 1L ? abs(blk.re) : Real(1L, blk.re.digits()) / abs(blk.re);
    }
    if (!lambda) problems.push_back("row 120 has no hyperbolic block");
    if (problems.empty()) {
        os << "nu1 " << check("row 119 nu1", ra.angles[0], "0.255011944221133753875666925693") << " digits, nu2 "
           << check("row 119 nu2", ra.angles[1], "2.19223274459622941216216635818e-5") << ", nu "
           << check("row 120 nu", rb.angles[0], "0.255011941995861150357102898351") << ", lambda "
           << check("row 120 lambda", *lambda, "1.00013775153254718967585223182") << "; ";
    }
    os << "80 vs 130 digits agree to " << a.min_matched << " and " << b.min_matched;
    if (a.min_matched < 30 || b.min_matched < 30) problems.push_back("cross-precision below 30 digits");
    for (const auto& p : problems) os << "; " << p;
    return {problems.empty(), os.str()};
}

Outcome criterion5() {
    std::ostringstream os;
    bool pass = true;
    for (int row : {119, 120}) {
        const CrossPrecisionReport& c = cross_precision(row);
        for (const MonodromyAnalysis* m : {&c.lo, &c.hi}) {
            const Real tol = pow10(-20, m->digits);
            int units = 0;
            for (const auto& e : m->report.eigenvalues) {
                const Real re = e.re - 1L;
                if (sqrt(re * re + e.im * e.im) < tol) ++units;
            }
            const Real det_err = abs(m->determinant - 1L);
            const bool ok = units == 8 && det_err < pow10(-30, m->digits);
            pass = pass && ok;
            os << (os.tellp() > 0 ? "; " : "") << "row " << row << " at " << m->digits << ": " << units
               << " unit eigenvalues, |det - 1| = " << det_err.to_string(2);
        }
    }
    return {pass, os.str()};
}

Outcome criterion6() {
    const Refinement& r = refine_row(119);
    const Real floor = pow10(-(stage1().digits - kGuardDigits), stage1().digits);
    std::ostringstream os;
    os << "residuals";
    for (const auto& it : r.run.trace) os << ' ' << it.residual.to_string(3);
    const auto slope = quadratic_slope(r.run.trace, floor);
    if (!slope) return {false, os.str() + "; fewer than three residuals above the floor"};
    os << "; slope " << fmt("%.3f", *slope);
    return {*slope >= 1.8, os.str()};
}

Outcome criterion7() {
    const Real one(1L, 30), half("0.5", 30), two(2L, 30);
    const double a = tau_update(0.2, one, half, 0.2);
    const double b = tau_update(0.2, one, two, 0.2);
    const double c = tau_update(0.9, one, half, 0.2);
    std::ostringstream os;
    os << "tau = " << a << ", " << b << ", " << c;
    return {a == 0.4 && b == 0.2 && c == 1.0, os.str()};
}

Outcome criterion8() {
    const int d = 64;
    const auto fe = fixtures::figure_eight(d);
    const IntegratorConfig cfg = IntegratorConfig::preset("desk");
    StateVector s = build_initial_state(fe.vx, fe.vy);
    const Real e0 = energy(s);
    Real worst_e(0L, d), worst_l(0L, d);
    bool permute_exact = true;
    auto permute3 = [&](const StateVector& x) {
        const StateVector p = cyclic_permute(cyclic_permute(cyclic_permute(x)));
        for (std::size_t i = 0; i < kDim; ++i) {
            if (!(p[i] == x[i]) || p[i].digits() != x[i].digits()) return false;
        }
        return true;
    };
    for (int n = 0; n < 100; ++n) {
        permute_exact = permute_exact && permute3(s);
        s = integrate_to(s, fe.period, cfg).final_state();
        worst_e = max(worst_e, abs((energy(s) - e0) / e0));
        worst_l = max(worst_l, abs(angular_momentum(s)));
    }
    permute_exact = permute_exact && permute3(s);
    std::ostringstream os;
    os << "max relative energy drift " << worst_e.to_string(3) << ", max |L| " << worst_l.to_string(3)
       << ", permute^3 " << (permute_exact ? "exact" : "differs");
    return {worst_e < pow10(-50, d) && worst_l < pow10(-50, d) && permute_exact, os.str()};
}

Outcome criterion9() {
    const PipelineConfig cfg = PipelineConfig::load(std::filesystem::path(CHOREO_SOURCE_DIR) / "configs" / "full-scale.json");
    const DryRunReport r = dry_run(cfg);
    std::vector<std::string> problems;
    if (cfg.domain.step.to_string() != "1/4096") problems.push_back("grid step " + cfg.domain.step.to_string());
    if (cfg.t0 != "300") problems.push_back("T0 " + cfg.t0);
    const int d1 = IntegratorConfig::preset(r.refine_preset).digits;
    const int d3a = IntegratorConfig::preset(r.polish_primary).digits;
    const int d3b = IntegratorConfig::preset(r.polish_verification).digits;
    if (d1 != 134 || d3a != 212 || d3b != 250) problems.push_back("preset digits differ");
    std::ostringstream os;
    os << r.grid_points << " grid points, presets " << d1 << "/" << d3a << "/" << d3b << " digits, "
       << r.stages.size() << " stages";
    for (const auto& p : problems) os << "; " << p;
    return {problems.empty() && r.grid_points > 0, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"figure-eight end to end at desk scale", criterion1},
        {"row 119 stage-1 refinement reproduces T*", criterion2},
        {"row 120 stage-1 refinement reproduces T* and k = 65", criterion3},
        {"stability angles and cross-precision agreement", criterion4},
        {"monodromy unit eigenvalues and determinant", criterion5},
        {"quadratic convergence of the row 119 refinement", criterion6},
        {"damping update examples", criterion7},
        {"conservation over 100 figure-eight periods", criterion8},
        {"dry run of the full-scale configuration", criterion9},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t n = 0; n < criteria.size(); ++n) {
        const int id = static_cast<int>(n) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[n].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[n].first << " ("
                  << o.detail << ") [" << fmt("%.1f s", seconds_since(t0)) << "]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
