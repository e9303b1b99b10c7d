#include "choreo/topology.hpp"

#include "choreo/errors.hpp"
#include "choreo/scan.hpp"

#include <algorithm>

namespace choreo {

Real oriented_area(const StateVector& s) {
    const Real ax = s[pos_x(1)] - s[pos_x(0)], ay = s[pos_y(1)] - s[pos_y(0)];
    const Real bx = s[pos_x(2)] - s[pos_x(0)], by = s[pos_y(2)] - s[pos_y(0)];
    return ax * by - ay * bx;
}

Real oriented_area_rate(const StateVector& s) {
    const Real ax = s[pos_x(1)] - s[pos_x(0)], ay = s[pos_y(1)] - s[pos_y(0)];
    const Real bx = s[pos_x(2)] - s[pos_x(0)], by = s[pos_y(2)] - s[pos_y(0)];
    const Real vax = s[vel_x(1)] - s[vel_x(0)], vay = s[vel_y(1)] - s[vel_y(0)];
    const Real vbx = s[vel_x(2)] - s[vel_x(0)], vby = s[vel_y(2)] - s[vel_y(0)];
    return vax * by - vay * bx + ax * vby - ay * vbx;
}

int middle_body(const StateVector& s) {
    auto d2 = [&](int i, int j) {
        const Real dx = s[pos_x(j)] - s[pos_x(i)], dy = s[pos_y(j)] - s[pos_y(i)];
        return dx * dx + dy * dy;
    };
    // the farthest pair are the ends of the segment
    const Real d01 = d2(0, 1), d02 = d2(0, 2), d12 = d2(1, 2);
    if (d01 >= d02 && d01 >= d12) return 3;
    if (d02 >= d12) return 2;
    return 1;
}

namespace {

Real area_at(const TaylorExpansion& exp, const Real& tau) {
    const int order = exp.order();
    std::array<Real, 6> p;
    for (std::size_t c = 0; c < 6; ++c) {
        Real acc = exp.coefficients[static_cast<std::size_t>(order)][c];
        for (int k = order - 1; k >= 0; --k) {
            mpfr_mul(acc.get(), acc.get(), tau.get(), MPFR_RNDN);
            mpfr_add(acc.get(), acc.get(), exp.coefficients[static_cast<std::size_t>(k)][c].get(), MPFR_RNDN);
        }
        p[c] = std::move(acc);
    }
    return (p[2] - p[0]) * (p[5] - p[1]) - (p[3] - p[1]) * (p[4] - p[0]);
}

}  // namespace

SyzygyDetector::SyzygyDetector(const Real& end_time, SyzygyOptions opts)
    : end_(end_time), margin_(Real(1L, end_time.digits()) / 100000000L), opts_(opts) {
    if (opts_.samples_per_step < 1) throw PreconditionError("samples_per_step must be positive");
}

void SyzygyDetector::start(const StateVector& initial) {
    const int d = initial[0].digits();
    const Real a = oriented_area(initial);
    if (abs(a) > pow10(-(d - kGuardDigits), d)) return;
    const Real rate = oriented_area_rate(initial);
    if (abs(rate).to_double() < opts_.tangent_threshold) throw DegenerateSyzygy("tangential syzygy at t = 0");
    found_.push_back({Real(initial[0].bits()), middle_body(initial), -rate.sign()});
}

void SyzygyDetector::add_step(const Real& t_start, const Real& h, const TaylorExpansion& exp) {
    const int d = t_start.digits();
    const int n = opts_.samples_per_step;
    const Real t_tol = pow10(-opts_.t_digits, std::max(d, opts_.t_digits + 10));
    Real prev_tau(bits_for_digits(d));
    Real prev = area_at(exp, prev_tau);
    for (int i = 1; i <= n; ++i) {
        Real tau = h * static_cast<long>(i) / static_cast<long>(n);
        Real cur = area_at(exp, tau);
        if (prev.sign() * cur.sign() < 0) {
            Real lo = prev_tau, hi = tau;
            const int before = prev.sign();
            while (hi - lo > t_tol) {
                Real mid = (lo + hi) / 2L;
                if (area_at(exp, mid).sign() == before) {
                    lo = std::move(mid);
                } else {
                    hi = std::move(mid);
                }
            }
            const Real root = (lo + hi) / 2L;
            const Real t = t_start + root;
            if (t > margin_ && t < end_ - margin_) {
                const StateVector s = advance(exp, root);
                if (abs(oriented_area_rate(s)).to_double() < opts_.tangent_threshold) {
                    throw DegenerateSyzygy("tangential syzygy at t = " + t.to_string(12));
                }
                found_.push_back({t, middle_body(s), before});
            }
        }
        prev_tau = std::move(tau);
        prev = std::move(cur);
    }
}

std::vector<Syzygy> detect_syzygies(const Trajectory& traj, const SyzygyOptions& opts) {
    if (traj.times.size() < 2) throw PreconditionError("trajectory has no steps");
    if (traj.expansions.size() != traj.steps()) throw PreconditionError("syzygy detection needs retained expansions");
    SyzygyDetector det(traj.end_time(), opts);
    det.start(traj.states.front());
    for (std::size_t n = 0; n < traj.steps(); ++n) {
        det.add_step(traj.times[n], traj.times[n + 1] - traj.times[n], traj.expansions[n]);
    }
    return det.syzygies();
}

std::vector<Syzygy> syzygies_over_period(const SearchTriplet& triplet, const IntegratorConfig& cfg,
                                         const SyzygyOptions& opts) {
    const StateVector x0 = state_at_digits(build_initial_state(triplet.vx, triplet.vy), cfg.digits);
    const Real period = triplet.period.at_digits(cfg.digits);
    SyzygyDetector det(period, opts);
    det.start(x0);
    TaylorPropagator prop(cfg);
    prop.propagate(x0, {}, period, [&](const StepInfo& s) { det.add_step(s.t_start, s.h, s.expansion); });
    return det.syzygies();
}

namespace {

char inverse(char c) { return static_cast<char>(c >= 'a' ? c - 'a' + 'A' : c - 'A' + 'a'); }

int rank(char c) {
    switch (c) {
        case 'a': return 0;
        case 'b': return 1;
        case 'A': return 2;
        case 'B': return 3;
    }
    throw PreconditionError(std::string("not a free-group letter: ") + c);
}

}  // namespace

std::string free_reduce(std::string_view word) {
    std::string out;
    for (char c : word) {
        rank(c);
        if (!out.empty() && out.back() == inverse(c)) {
            out.pop_back();
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string cyclic_reduce(std::string_view word) {
    std::string w = free_reduce(word);
    std::size_t lo = 0, hi = w.size();
    while (hi - lo >= 2 && w[lo] == inverse(w[hi - 1])) {
        ++lo;
        --hi;
    }
    return w.substr(lo, hi - lo);
}

std::string canonical_rotation(std::string_view word) {
    const std::string w = cyclic_reduce(word);
    const std::size_t n = w.size();
    std::size_t best = 0;
    for (std::size_t s = 1; s < n; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            const int a = rank(w[(s + i) % n]), b = rank(w[(best + i) % n]);
            if (a != b) {
                if (a < b) best = s;
                break;
            }
        }
    }
    return w.substr(best) + w.substr(0, best);
}

FreeGroupWord make_word(std::string_view letters) {
    FreeGroupWord w{std::string(letters), free_reduce(letters), canonical_rotation(letters)};
    if (w.canonical.empty()) throw EmptyWord("word '" + w.letters + "' reduces to the identity");
    return w;
}

FreeGroupWord read_word(const std::vector<Syzygy>& syzygies) {
    // orientation fixed so that the figure-eight reads abAB
    std::string letters;
    for (const auto& s : syzygies) {
        if (s.middle_body == 1) letters.push_back(s.crossing_sign > 0 ? 'a' : 'A');
        if (s.middle_body == 2) letters.push_back(s.crossing_sign > 0 ? 'B' : 'b');
    }
    if (letters.empty()) throw EmptyWord("no syzygy produced a letter");
    return make_word(letters);
}

std::optional<int> satellite_power(const FreeGroupWord& word) {
    const std::size_t n = word.canonical.size();
    if (n == 0 || n % 4 != 0) return std::nullopt;
    std::string power;
    for (std::size_t i = 0; i < n / 4; ++i) power += "abAB";
    if (canonical_rotation(power) != word.canonical) return std::nullopt;
    return static_cast<int>(n / 4);
}

ChoreographyVerdict choreography_check(const SearchTriplet& solution, int k, const IntegratorConfig& cfg,
                                       const Real& tolerance) {
    ChoreographyVerdict v;
    v.power_not_divisible_by_3 = k % 3 != 0;
    const StateVector x0 = state_at_digits(build_initial_state(solution.vx, solution.vy), cfg.digits);
    TaylorPropagator prop(cfg);
    const auto res = prop.propagate(x0, {}, solution.period.at_digits(cfg.digits) / 3L);
    auto [dist, cycle] = permuted_distance(res.state, x0);
    v.proximity = std::move(dist);
    v.cycle = cycle;
    v.returns_at_third = v.proximity < tolerance;
    v.choreography = v.power_not_divisible_by_3 && v.returns_at_third;
    return v;
}

}  // namespace choreo
