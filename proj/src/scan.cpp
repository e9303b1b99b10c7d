#include "choreo/scan.hpp"

#include "choreo/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace choreo {

StateVector cyclic_permute(const StateVector& s) {
    StateVector out = s;
    for (int b = 0; b < 3; ++b) {
        const int src = (b + 1) % 3;
        out[pos_x(b)] = s[pos_x(src)];
        out[pos_y(b)] = s[pos_y(src)];
        out[vel_x(b)] = s[vel_x(src)];
        out[vel_y(b)] = s[vel_y(src)];
    }
    return out;
}

GridStep GridStep::parse(std::string_view text) {
    GridStep g;
    const auto slash = text.find('/');
    auto number = [&](std::string_view part) {
        long v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size() || v <= 0) {
            throw ConfigError("grid step must look like p/q with positive integers, got '" + std::string(text) + "'");
        }
        return v;
    };
    if (slash == std::string_view::npos) {
        g.num = number(text);
        g.den = 1;
    } else {
        g.num = number(text.substr(0, slash));
        g.den = number(text.substr(slash + 1));
    }
    return g;
}

std::string GridStep::to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

Real GridStep::value(int digits) const { return Real(num, digits) / den; }

void SearchDomain::validate() const {
    if (step.num <= 0 || step.den <= 0) throw ConfigError("grid step must be positive");
    if (!(vx_lo <= vx_hi && vy_lo <= vy_hi)) throw ConfigError("search rectangle is empty");
    if (!mask.empty() && mask.size() < 3) throw ConfigError("mask polygon needs at least three vertices");
}

namespace {

bool in_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
    bool inside = false;
    for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
        const auto& p = poly[a];
        const auto& q = poly[b];
        if ((p[1] > y) != (q[1] > y) && x < (q[0] - p[0]) * (y - p[1]) / (q[1] - p[1]) + p[0]) inside = !inside;
    }
    return inside;
}

}  // namespace

bool SearchDomain::contains(double vx, double vy) const {
    if (vx >= vx_lo && vx <= vx_hi && vy >= vy_lo && vy <= vy_hi) return true;
    return !mask.empty() && in_polygon(mask, vx, vy);
}

std::vector<std::array<long, 2>> SearchDomain::grid_points() const {
    validate();
    double xlo = vx_lo, xhi = vx_hi, ylo = vy_lo, yhi = vy_hi;
    for (const auto& p : mask) {
        xlo = std::min(xlo, p[0]);
        xhi = std::max(xhi, p[0]);
        ylo = std::min(ylo, p[1]);
        yhi = std::max(yhi, p[1]);
    }
    const double h = static_cast<double>(step.num) / static_cast<double>(step.den);
    const long i0 = static_cast<long>(std::ceil(xlo / h - 1e-9)), i1 = static_cast<long>(std::floor(xhi / h + 1e-9));
    const long j0 = static_cast<long>(std::ceil(ylo / h - 1e-9)), j1 = static_cast<long>(std::floor(yhi / h + 1e-9));
    std::vector<std::array<long, 2>> pts;
    for (long i = i0; i <= i1; ++i) {
        for (long j = j0; j <= j1; ++j) {
            if (contains(static_cast<double>(i) * h, static_cast<double>(j) * h)) pts.push_back({i, j});
        }
    }
    return pts;
}

std::pair<Real, int> permuted_distance(const StateVector& state, const StateVector& start) {
    const StateVector p1 = cyclic_permute(state);
    Real d1 = distance2(p1, start);
    Real d2 = distance2(cyclic_permute(p1), start);
    if (d2 < d1) return {std::move(d2), 2};
    return {std::move(d1), 1};
}

namespace {

struct Endpoint {
    Real t;
    Real d;
    int cycle;
};

class ProximityTracker {
public:
    ProximityTracker(const StateVector& start, const Real& lower, const ProximityOptions& opts, int digits)
        : start_(start), lower_(lower), t_tol_(opts.t_tolerance), accept_(opts.accept_below), digits_(digits) {}

    void add_step(const Real& t_start, const Real& h, const TaylorExpansion& exp, const StateVector& end) {
        if (points_.empty()) {
            auto [d, c] = permuted_distance(exp.coefficients[0], start_);
            points_.push_back({t_start, std::move(d), c});
        }
        auto [d, c] = permuted_distance(end, start_);
        points_.push_back({t_start + h, std::move(d), c});
        steps_.push_back(exp);
        if (points_.size() > 3) {
            points_.erase(points_.begin());
            steps_.erase(steps_.begin());
        }
        if (points_.size() == 3 && points_[1].d <= points_[0].d && points_[1].d < points_[2].d) {
            refine(0, 2);
            settle();
        }
    }

    void finish() {
        const std::size_t n = points_.size();
        if (n >= 2 && points_[n - 1].d < points_[n - 2].d) {
            refine(n - 2, n - 1);
            settle();
        }
        if (!best_) {
            // monotone increase: the smallest admissible endpoint
            for (const auto& p : points_) {
                if (p.t > lower_) consider(p.t.to_double(), p.d, p.cycle);
            }
        }
    }

    ProximityResult result() const {
        const Best& pick = first_ ? *first_ : *best_;
        ProximityResult r;
        r.r_min = pick.d;
        r.t_min = Real(pick.t, digits_);
        r.cycle = pick.cycle;
        return r;
    }

private:
    struct Best {
        double t;
        Real d;
        int cycle;
    };

    // points_[lo..hi] bracket a minimum; steps_[k] spans points_[k]..points_[k+1]
    void refine(std::size_t lo, std::size_t hi) {
        double a = std::max(points_[lo].t.to_double(), lower_.to_double());
        double b = points_[hi].t.to_double();
        if (!(b > lower_.to_double())) return;
        auto eval = [&](double t) {
            std::size_t k = lo;
            while (k + 1 < hi && Real(t, digits_) > points_[k + 1].t) ++k;
            const Real off = Real(t, digits_) - points_[k].t;
            return permuted_distance(advance(steps_[k], off), start_);
        };
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - g * (b - a), d = a + g * (b - a);
        auto fc = eval(c), fd = eval(d);
        while (b - a > t_tol_) {
            if (fc.first < fd.first) {
                b = d;
                d = c;
                fd = std::move(fc);
                c = b - g * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = std::move(fd);
                d = a + g * (b - a);
                fd = eval(d);
            }
        }
        if (fc.first < fd.first) {
            consider(c, fc.first, fc.second);
        } else {
            consider(d, fd.first, fd.second);
        }
        // endpoints themselves may beat the interior estimate
        for (std::size_t k = lo; k <= hi; ++k) {
            if (points_[k].t > lower_) consider(points_[k].t.to_double(), points_[k].d, points_[k].cycle);
        }
    }

    void consider(double t, const Real& d, int cycle) {
        if (!best_ || d < best_->d) best_ = Best{t, d, cycle};
    }

    // the earliest refined minimum below the acceptance level
    void settle() {
        if (!first_ && best_ && best_->d.to_double() < accept_) first_ = best_;
    }

    StateVector start_;
    Real lower_;
    double t_tol_;
    double accept_;
    int digits_;
    std::vector<Endpoint> points_;
    std::vector<TaylorExpansion> steps_;
    std::optional<Best> best_;
    std::optional<Best> first_;
};

}  // namespace

ProximityResult return_proximity(const Real& vx, const Real& vy, const Real& t0, const IntegratorConfig& cfg,
                                 const ProximityOptions& opts) {
    if (!(t0 > 1L)) throw PreconditionError("return proximity needs T0 > 1");
    const int d = cfg.digits;
    const StateVector x0 = state_at_digits(build_initial_state(vx, vy), d);
    ProximityTracker tracker(x0, Real(1L, d), opts, d);
    ProximityResult out;
    try {
        TaylorPropagator prop(cfg);
        prop.propagate(x0, {}, t0, [&](const StepInfo& s) { tracker.add_step(s.t_start, s.h, s.expansion, s.end_state); });
    } catch (const CollisionError&) {
        out.collided = true;
        out.r_min = Real(bits_for_digits(d));
        mpfr_set_inf(out.r_min.get(), 1);
        out.t_min = Real(bits_for_digits(d));
        return out;
    }
    tracker.finish();
    return tracker.result();
}

int default_worker_count() {
    if (const char* env = std::getenv("CHOREO_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<std::size_t> local_minima(const std::vector<GridValue>& values, double threshold) {
    std::map<std::pair<long, long>, double> by_index;
    for (const auto& v : values) by_index[{v.i, v.j}] = v.r;
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < values.size(); ++n) {
        const auto& v = values[n];
        if (!(v.r < threshold)) continue;
        bool strict = true;
        for (long di = -1; di <= 1 && strict; ++di) {
            for (long dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                auto it = by_index.find({v.i + di, v.j + dj});
                if (it != by_index.end() && !(v.r < it->second)) {
                    strict = false;
                    break;
                }
            }
        }
        if (strict) out.push_back(n);
    }
    return out;
}

namespace {

using nlohmann::json;

json checkpoint_header(const SearchDomain& domain, const ScanOptions& opts) {
    return json{{"checkpoint", "choreo-scan"},
                {"step", domain.step.to_string()},
                {"t0", opts.t0.to_exact_string()},
                {"preset", opts.integrator.name()}};
}

std::string value_text(const Real& x) { return x.is_finite() ? x.to_string(20) : std::string("inf"); }

GridValue make_value(long i, long j, const ProximityResult& r) {
    GridValue v{i, j, 0.0, value_text(r.r_min), value_text(r.t_min), r.cycle};
    v.r = r.collided ? std::numeric_limits<double>::infinity() : std::stod(v.r_text);
    return v;
}

}  // namespace

std::vector<Candidate> scan_domain(const SearchDomain& domain, const ScanOptions& opts) {
    domain.validate();
    opts.integrator.validate();
    const auto points = domain.grid_points();
    const int d = opts.integrator.digits;

    std::map<std::pair<long, long>, GridValue> done;
    std::ofstream log;
    if (opts.checkpoint) {
        const json header = checkpoint_header(domain, opts);
        if (std::ifstream in{*opts.checkpoint}) {
            std::string line;
            bool first = true;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json j;
                try {
                    j = json::parse(line);
                } catch (const json::parse_error&) {
                    break;  // torn final line from an interrupted run
                }
                if (first) {
                    if (j != header) throw ConfigError("checkpoint was written with different scan settings");
                    first = false;
                    continue;
                }
                GridValue v{j.at("i").get<long>(), j.at("j").get<long>(), 0.0, j.at("r").get<std::string>(),
                            j.at("t").get<std::string>(), j.at("cycle").get<int>()};
                v.r = v.r_text == "inf" ? std::numeric_limits<double>::infinity() : std::stod(v.r_text);
                done[{v.i, v.j}] = v;
            }
            log.open(*opts.checkpoint, std::ios::app);
        } else {
            log.open(*opts.checkpoint);
            log << header.dump() << '\n';
        }
        if (!log) throw ConfigError("cannot write checkpoint " + opts.checkpoint->string());
    }

    std::vector<std::array<long, 2>> todo;
    for (const auto& p : points) {
        if (!done.count({p[0], p[1]})) todo.push_back(p);
    }
    const Real step = domain.step.value(d);
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::size_t finished = points.size() - todo.size();
    auto worker = [&] {
        for (std::size_t n = next++; n < todo.size(); n = next++) {
            const auto [i, j] = todo[n];
            const Real vx = step * i, vy = step * j;
            GridValue v = make_value(i, j, return_proximity(vx, vy, opts.t0, opts.integrator, {1e-6, opts.threshold}));
            std::lock_guard lock(mu);
            if (log.is_open()) {
                log << json{{"i", i}, {"j", j}, {"r", v.r_text}, {"t", v.t_text}, {"cycle", v.cycle}}.dump() << '\n';
                log.flush();
            }
            done[{i, j}] = std::move(v);
            ++finished;
            if (opts.progress) opts.progress(finished, points.size());
        }
    };
    const int nthreads = std::max(1, std::min<int>(opts.workers, static_cast<int>(todo.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < nthreads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<GridValue> values;
    values.reserve(points.size());
    for (const auto& p : points) values.push_back(done.at({p[0], p[1]}));
    std::vector<Candidate> out;
    for (std::size_t n : local_minima(values, opts.threshold)) {
        const auto& v = values[n];
        Candidate c;
        c.i = v.i;
        c.j = v.j;
        c.vx = step * v.i;
        c.vy = step * v.j;
        c.t_min = Real(v.t_text, d);
        c.t_guess = c.t_min * 3L;
        c.r_value = Real(v.r_text, d);
        c.cycle = v.cycle;
        if (c.t_min > 1L && c.t_min <= opts.t0) out.push_back(std::move(c));
    }
    return out;
}

}  // namespace choreo
