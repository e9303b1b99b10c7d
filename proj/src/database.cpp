#include "choreo/database.hpp"

#include "choreo/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace choreo {

using nlohmann::json;

Real parse_decimal(std::string_view text, int min_digits) {
    int count = 0;
    for (char c : text) {
        if (c == 'e' || c == 'E') break;
        if (c >= '0' && c <= '9') ++count;
    }
    if (count == 0) throw PreconditionError("not a decimal number: '" + std::string(text) + "'");
    return Real(text, std::max(count, min_digits));
}

SearchTriplet SolutionRecord::triplet() const {
    return {parse_decimal(vx), parse_decimal(vy), parse_decimal(period)};
}

int SolutionRecord::digits() const {
    const SearchTriplet t = triplet();
    return std::max({t.vx.digits(), t.vy.digits(), t.period.digits()});
}

std::string compute_t_star(const std::string& vx, const std::string& vy, const std::string& period) {
    const Real a = parse_decimal(vx), b = parse_decimal(vy), t = parse_decimal(period);
    const int d = std::max({a.digits(), b.digits(), t.digits()});
    const int work = d + kGuardDigits;
    const Real ts = scale_invariant_period(t.at_digits(work), a.at_digits(work), b.at_digits(work));
    return ts.to_string(d);
}

namespace {

json stability_to_json(const StabilityData& s) {
    json j;
    j["verdict"] = s.verdict;
    j["type"] = s.type;
    j["linearly_stable"] = s.linearly_stable;
    j["angles"] = s.angles;
    if (s.lambda) j["lambda"] = *s.lambda;
    j["matched_digits"] = s.matched_digits;
    j["digits"] = {s.digits_lo, s.digits_hi};
    j["eigenvalues"] = s.eigenvalues;
    j["conditions"] = s.conditions;
    j["determinant_error"] = s.determinant_error;
    return j;
}

StabilityData stability_from_json(const json& j) {
    StabilityData s;
    s.verdict = j.at("verdict").get<std::string>();
    s.type = j.value("type", "");
    s.linearly_stable = j.value("linearly_stable", false);
    s.angles = j.value("angles", std::vector<std::string>{});
    if (j.contains("lambda")) s.lambda = j["lambda"].get<std::string>();
    s.matched_digits = j.value("matched_digits", 0);
    if (j.contains("digits")) {
        s.digits_lo = j["digits"].at(0).get<int>();
        s.digits_hi = j["digits"].at(1).get<int>();
    }
    s.eigenvalues = j.value("eigenvalues", std::vector<std::array<std::string, 2>>{});
    s.conditions = j.value("conditions", std::vector<std::string>{});
    s.determinant_error = j.value("determinant_error", "");
    return s;
}

}  // namespace

std::string to_json_line(const SolutionRecord& r) {
    // nlohmann's json object keeps keys sorted, which makes the output stable
    json j;
    j["id"] = r.id;
    j["vx"] = r.vx;
    j["vy"] = r.vy;
    j["T"] = r.period;
    j["T_star"] = r.t_star;
    j["residual"] = r.residual;
    j["correct_digits"] = r.correct_digits;
    j["polish_tolerance"] = r.polish_tolerance;
    if (r.k) j["k"] = *r.k;
    if (!r.word.empty()) j["word"] = r.word;
    if (r.choreography) j["choreography"] = *r.choreography;
    if (r.choreography_proximity) j["choreography_proximity"] = *r.choreography_proximity;
    if (r.stability) j["stability"] = stability_to_json(*r.stability);
    j["presets"] = r.presets;
    json prov;
    if (r.cell) prov["cell"] = *r.cell;
    prov["timestamps"] = r.timestamps;
    j["provenance"] = prov;
    if (!r.duplicates.empty()) j["duplicates"] = r.duplicates;
    if (!r.conflicts.empty()) j["conflicts"] = r.conflicts;
    return j.dump();
}

SolutionRecord record_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed record: ") + e.what());
    }
    try {
        SolutionRecord r;
        r.id = j.at("id").get<std::string>();
        r.vx = j.at("vx").get<std::string>();
        r.vy = j.at("vy").get<std::string>();
        r.period = j.at("T").get<std::string>();
        r.t_star = j.value("T_star", "");
        r.residual = j.value("residual", "");
        r.correct_digits = j.value("correct_digits", 0);
        r.polish_tolerance = j.value("polish_tolerance", "");
        if (j.contains("k")) r.k = j["k"].get<int>();
        r.word = j.value("word", "");
        if (j.contains("choreography")) r.choreography = j["choreography"].get<bool>();
        if (j.contains("choreography_proximity")) r.choreography_proximity = j["choreography_proximity"].get<std::string>();
        if (j.contains("stability")) r.stability = stability_from_json(j["stability"]);
        r.presets = j.value("presets", std::map<std::string, std::string>{});
        if (j.contains("provenance")) {
            const json& p = j["provenance"];
            if (p.contains("cell")) r.cell = p["cell"].get<std::array<long, 2>>();
            r.timestamps = p.value("timestamps", std::map<std::string, std::string>{});
        }
        r.duplicates = j.value("duplicates", std::vector<std::string>{});
        r.conflicts = j.value("conflicts", std::vector<std::string>{});
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("incomplete record: ") + e.what());
    }
}

std::vector<SolutionRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<SolutionRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_json_line(line));
    }
    return out;
}

void write_records(const std::filesystem::path& path, const std::vector<SolutionRecord>& records) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        for (const auto& r : records) out << to_json_line(r) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

DedupReport deduplicate(std::vector<SolutionRecord>& records, int digits) {
    const std::size_t n = records.size();
    std::vector<Real> ts;
    ts.reserve(n);
    for (const auto& r : records) {
        if (r.t_star.empty()) throw PreconditionError("record " + r.id + " has no T*");
        ts.push_back(parse_decimal(r.t_star));
    }

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    DedupReport rep;
    for (auto& r : records) {
        r.duplicates.clear();
        r.conflicts.clear();
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (matching_digits(ts[a], ts[b]) < digits) continue;
            if (records[a].k == records[b].k) {
                parent[find(a)] = find(b);
            } else {
                rep.conflicts.emplace_back(a, b);
                records[a].conflicts.push_back(records[b].id);
                records[b].conflicts.push_back(records[a].id);
            }
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
    for (auto& [root, members] : groups) {
        for (std::size_t i : members) {
            for (std::size_t j : members) {
                if (i != j) records[i].duplicates.push_back(records[j].id);
            }
        }
        rep.groups.push_back(members);
    }
    std::sort(rep.groups.begin(), rep.groups.end());
    rep.representations = n;
    rep.distinct = rep.groups.size();
    return rep;
}

namespace {

bool is_hyperbolic_elliptic(const StabilityData& s) { return s.type == "hyperbolic-elliptic"; }

}  // namespace

std::vector<PairRecord> detect_pairs(const std::vector<SolutionRecord>& records, const PairThresholds& th) {
    std::vector<PairRecord> out;
    for (const auto& st : records) {
        if (!st.stability || !st.stability->linearly_stable || !st.k || st.stability->angles.size() != 2) continue;
        const Real ts_stable = parse_decimal(st.t_star);
        const Real nu1 = parse_decimal(st.stability->angles[0]);
        const Real nu2 = parse_decimal(st.stability->angles[1]);
        for (const auto& hy : records) {
            if (!hy.stability || !is_hyperbolic_elliptic(*hy.stability) || hy.k != st.k) continue;
            if (hy.stability->angles.size() != 1 || !hy.stability->lambda) continue;
            const Real ts_hyp = parse_decimal(hy.t_star);
            PairRecord p;
            p.stable_id = st.id;
            p.hyperbolic_id = hy.id;
            p.k = *st.k;
            p.t_star_gap = (abs(ts_stable - ts_hyp) / abs(ts_stable)).to_double();
            p.nu_gap = abs(nu1 - parse_decimal(hy.stability->angles[0])).to_double();
            p.small_nu = nu2.to_double();
            p.lambda_excess = (parse_decimal(*hy.stability->lambda) - 1L).to_double();
            if (p.t_star_gap >= th.t_star_relative) continue;
            if (p.nu_gap >= th.nu_gap) continue;
            if (p.small_nu >= th.small_nu) continue;
            if (!(p.lambda_excess > 0.0 && p.lambda_excess < th.lambda_excess)) continue;
            out.push_back(p);
        }
    }
    return out;
}

std::string to_json_line(const PairRecord& p) {
    json j;
    j["stable"] = p.stable_id;
    j["hyperbolic_elliptic"] = p.hyperbolic_id;
    j["k"] = p.k;
    j["t_star_relative_gap"] = p.t_star_gap;
    j["nu_gap"] = p.nu_gap;
    j["small_nu"] = p.small_nu;
    j["lambda_minus_one"] = p.lambda_excess;
    return j.dump();
}

namespace {

/// Double-precision copy of the position series of one step.
struct PositionSeries {
    std::vector<std::array<double, 6>> c;

    explicit PositionSeries(const TaylorExpansion& exp) : c(exp.coefficients.size()) {
        for (std::size_t k = 0; k < c.size(); ++k) {
            for (std::size_t i = 0; i < 6; ++i) c[k][i] = exp.coefficients[k][i].to_double();
        }
    }

    std::array<double, 6> at(double tau) const {
        std::array<double, 6> p = c.back();
        for (std::size_t k = c.size() - 1; k-- > 0;) {
            for (std::size_t i = 0; i < 6; ++i) p[i] = p[i] * tau + c[k][i];
        }
        return p;
    }
};

struct Canvas {
    double x0, y0, scale;
    double px(double x) const { return (x - x0) * scale; }
    double py(double y) const { return (y0 - y) * scale; }
};

void integrate_positions(const SolutionRecord& record, const IntegratorConfig& cfg,
                         const std::function<void(const PositionSeries&, double h)>& on_step) {
    const SearchTriplet t = record.triplet();
    if (t.period.sign() <= 0) throw PreconditionError("plot needs a positive period");
    const StateVector x0 = state_at_digits(build_initial_state(t.vx, t.vy), cfg.digits);
    TaylorPropagator prop(cfg);
    prop.propagate(x0, {}, t.period.at_digits(cfg.digits),
                   [&](const StepInfo& s) { on_step(PositionSeries(s.expansion), s.h.to_double()); });
}

}  // namespace

std::string plot_svg(const SolutionRecord& record, const PlotOptions& opts) {
    if (opts.resolution < 16) throw PreconditionError("plot resolution must be at least 16 pixels");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    integrate_positions(record, opts.integrator, [&](const PositionSeries& s, double h) {
        for (int i = 0; i <= 8; ++i) {
            const auto p = s.at(h * i / 8.0);
            for (int b = 0; b < 3; ++b) {
                xmin = std::min(xmin, p[2 * b]);
                xmax = std::max(xmax, p[2 * b]);
                ymin = std::min(ymin, p[2 * b + 1]);
                ymax = std::max(ymax, p[2 * b + 1]);
            }
        }
    });

    const double res = opts.resolution;
    const double margin = 0.05 * res;
    const double span = std::max(xmax - xmin, ymax - ymin);
    const Canvas cv{xmin - (span - (xmax - xmin)) / 2, ymax + (span - (ymax - ymin)) / 2,
                    (res - 2 * margin) / (span > 0 ? span : 1.0)};

    // Subdivide until every body moves less than `max_gap` pixels between samples.
    constexpr double max_gap = 0.9;
    std::array<std::vector<std::array<double, 2>>, 3> paths;
    auto emit = [&](const std::array<double, 6>& p) {
        for (int b = 0; b < 3; ++b) paths[b].push_back({cv.px(p[2 * b]) + margin, cv.py(p[2 * b + 1]) + margin});
    };
    auto gap = [&](const std::array<double, 6>& a, const std::array<double, 6>& b) {
        double g = 0.0;
        for (int k = 0; k < 3; ++k) {
            g = std::max(g, std::hypot(a[2 * k] - b[2 * k], a[2 * k + 1] - b[2 * k + 1]) * cv.scale);
        }
        return g;
    };
    bool first = true;
    integrate_positions(record, opts.integrator, [&](const PositionSeries& s, double h) {
        if (first) {
            emit(s.at(0.0));
            first = false;
        }
        std::vector<std::pair<double, std::array<double, 6>>> stack{{h, s.at(h)}};
        double t = 0.0;
        auto cur = s.at(0.0);
        while (!stack.empty()) {
            auto [tn, pn] = stack.back();
            if (gap(cur, pn) < max_gap || tn - t < 1e-15) {
                emit(pn);
                cur = pn;
                t = tn;
                stack.pop_back();
            } else {
                const double tm = 0.5 * (t + tn);
                stack.emplace_back(tm, s.at(tm));
            }
        }
    });

    static constexpr std::array<const char*, 3> colors{"#d62728", "#1f77b4", "#2ca02c"};
    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(2);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.resolution << "\" height=\""
        << opts.resolution << "\" viewBox=\"0 0 " << opts.resolution << ' ' << opts.resolution << "\">\n"
        << "<title>" << (record.id.empty() ? "orbit" : record.id) << " T=" << record.period.substr(0, 20)
        << "</title>\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int b = 0; b < 3; ++b) {
        svg << "<polyline data-body=\"" << b + 1 << "\" fill=\"none\" stroke=\"" << colors[b]
            << "\" stroke-width=\"1\" stroke-opacity=\"0.7\" points=\"";
        for (std::size_t i = 0; i < paths[b].size(); ++i) {
            if (i) svg << ' ';
            svg << paths[b][i][0] << ',' << paths[b][i][1];
        }
        svg << "\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string export_csv(const std::vector<SolutionRecord>& records, int digits) {
    std::ostringstream out;
    out << "N,vx,vy,T,T*,k\n";
    auto fmt = [&](const std::string& s) { return s.empty() ? std::string() : parse_decimal(s).to_fixed_string(digits); };
    for (const auto& r : records) {
        out << r.id << ',' << fmt(r.vx) << ',' << fmt(r.vy) << ',' << fmt(r.period) << ',' << fmt(r.t_star) << ','
            << (r.k ? std::to_string(*r.k) : std::string()) << '\n';
    }
    return out.str();
}

}  // namespace choreo
