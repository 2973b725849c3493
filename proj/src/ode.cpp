#include "canard/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace canard::ode {

State VectorField::operator()(std::span<const double> x) const {
    State dx(dimension);
    rhs(x, dx);
    return dx;
}

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("rtol and atol must be positive");
    if (!(h_min > 0.0)) throw std::invalid_argument("h_min must be positive");
    if (!(h_min <= h_init) || !(h_init <= h_max)) throw std::invalid_argument("need h_min <= h_init <= h_max");
    if (max_steps == 0) throw std::invalid_argument("max_steps must be positive");
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::reached_t1: return "reached_t1";
        case Termination::terminal_event: return "terminal_event";
        case Termination::step_floor: return "step_floor";
        case Termination::max_steps: return "max_steps";
        case Termination::non_finite: return "non_finite";
    }
    return "unknown";
}

void Trajectory::push(double t, std::span<const double> x) {
    times_.push_back(t);
    states_.insert(states_.end(), x.begin(), x.end());
}

State Trajectory::final_state() const {
    auto s = state(size() - 1);
    return {s.begin(), s.end()};
}

bool Trajectory::completed() const {
    return termination == Termination::reached_t1 || termination == Termination::terminal_event;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller constants (Hairer-Wanner defaults).
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // largest shrink per step is 1/5
constexpr double kFacMax = 10.0;  // largest growth per step

bool sign_change(double g0, double g1, Direction d) {
    const bool up = g0 < 0.0 && g1 >= 0.0;
    const bool down = g0 > 0.0 && g1 <= 0.0;
    switch (d) {
        case Direction::rising: return up;
        case Direction::falling: return down;
        case Direction::any: return up || down;
    }
    return false;
}

class Stepper {
public:
    Stepper(const Rhs& f, double sign, std::size_t n) : f_(f), sign_(sign), n_(n), tmp_(n) {
        for (auto& k : k_) k.resize(n);
    }

    void eval(std::span<const double> x, std::span<double> dx) const {
        f_(x, dx);
        if (sign_ < 0.0)
            for (auto& v : dx) v = -v;
    }

    // One step of size h from (y, f0). Writes ynew and f(ynew); returns the
    // scaled RMS error estimate when want_error is set.
    double step(std::span<const double> y, std::span<const double> f0, double h, std::span<double> ynew,
                std::span<double> f1, const IntegratorConfig* cfg) {
        auto& [k2, k3, k4, k5, k6, k7] = k_;
        const std::size_t n = n_;
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * f0[i];
        eval(tmp_, k2);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * f0[i] + a32 * k2[i]);
        eval(tmp_, k3);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
        eval(tmp_, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        eval(tmp_, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        eval(tmp_, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (a71 * f0[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        eval(ynew, f1);
        if (cfg == nullptr) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * f1[i]);
            const double sc = cfg->atol + cfg->rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            acc += (e / sc) * (e / sc);
        }
        return std::sqrt(acc / static_cast<double>(n));
    }

    // Exact sub-step used for event refinement; no error estimate.
    void substep(std::span<const double> y, std::span<const double> f0, double h, std::span<double> out) {
        std::vector<double> fout(n_);
        step(y, f0, h, out, fout, nullptr);
    }

    std::size_t dim() const { return n_; }

private:
    const Rhs& f_;
    double sign_;
    std::size_t n_;
    std::array<std::vector<double>, 6> k_;
    std::vector<double> tmp_;
};

double hermite(double y0, double f0, double y1, double f1, double h, double th) {
    const double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    const double h10 = th * (1.0 - th) * (1.0 - th);
    const double h01 = th * th * (3.0 - 2.0 * th);
    const double h11 = th * th * (th - 1.0);
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

// Initial guess for a root of g on [0, h]: bisection on the cubic Hermite
// interpolant of the step.
double hermite_guess(const EventSpec& ev, std::span<const double> y0, std::span<const double> f0,
                     std::span<const double> y1, std::span<const double> f1, double h, double g0) {
    const std::size_t n = y0.size();
    std::vector<double> x(n);
    auto gi = [&](double th) {
        for (std::size_t i = 0; i < n; ++i) x[i] = hermite(y0[i], f0[i], y1[i], f1[i], h, th);
        return ev.g(x);
    };
    double lo = 0.0, hi = 1.0, glo = g0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gi(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi) * h;
}

struct Located {
    double tau;
    std::vector<double> x;
};

// Illinois refinement on exact states propagate(tau), tau in [0, h].
template <class Propagate>
Located refine(const EventSpec& ev, Propagate&& propagate, double h, double g0, double g1, double guess,
               std::size_t n, bool throw_on_fail) {
    double a = 0.0, b = h, ga = g0, gb = g1;
    std::vector<double> xa, xb, x(n);
    int side = 0;
    double tau = guess;
    if (!(tau > 0.0 && tau < h)) tau = 0.5 * h;
    for (int it = 0; it < 200; ++it) {
        propagate(tau, x);
        const double gt = ev.g(x);
        if (std::abs(gt) <= ev.tolerance) return {tau, x};
        if ((gt < 0.0) == (ga < 0.0)) {
            a = tau;
            ga = gt;
            xa = x;
            if (side == -1) gb *= 0.5;
            side = -1;
        } else {
            b = tau;
            gb = gt;
            xb = x;
            if (side == 1) ga *= 0.5;
            side = 1;
        }
        if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(h))) break;
        tau = (a * gb - b * ga) / (gb - ga);
        if (!(tau > a && tau < b)) tau = 0.5 * (a + b);
    }
    if (throw_on_fail) throw std::runtime_error("event refinement did not converge");
    // Keep the closer bracket end; the residual exceeds tolerance only for
    // near-discontinuous g.
    if (!xb.empty() && (xa.empty() || std::abs(gb) < std::abs(ga))) return {b, xb};
    if (!xa.empty()) return {a, xa};
    propagate(b, x);
    return {b, x};
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); });
}

}  // namespace

Trajectory integrate(const VectorField& field, std::span<const double> state0, double t0, double t1,
                     const IntegratorConfig& config, std::span<const EventSpec> events) {
    config.validate();
    const std::size_t n = field.dimension;
    if (state0.size() != n) throw std::invalid_argument("state dimension does not match field");
    if (t1 == t0) throw std::invalid_argument("t1 must differ from t0");

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span_s = std::abs(t1 - t0);
    auto time_of = [&](double s) { return t0 + dir * s; };

    Stepper st(field.rhs, dir, n);
    Trajectory traj(n);
    std::vector<double> y(state0.begin(), state0.end()), f0(n), ynew(n), f1(n);
    if (!all_finite(y)) {
        traj.push(t0, y);
        traj.termination = Termination::non_finite;
        return traj;
    }
    st.eval(y, f0);
    traj.push(t0, y);

    std::vector<double> gprev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].g(y);

    double s = 0.0;
    double h = std::min({config.h_init, config.h_max, span_s});
    double facold = 1e-4;
    bool last_rejected = false;
    bool pushed_final = true;

    while (true) {
        if (traj.steps >= config.max_steps) {
            traj.termination = Termination::max_steps;
            break;
        }
        bool last = false;
        if (s + 1.01 * h >= span_s) {
            h = span_s - s;
            last = true;
        }
        const double err = st.step(y, f0, h, ynew, f1, &config);
        if (!std::isfinite(err) || !all_finite(ynew)) {
            ++traj.rejected;
            h *= 0.1;
            last_rejected = true;
            if (h < config.h_min) {
                traj.termination = Termination::non_finite;
                break;
            }
            continue;
        }
        const double fac11 = std::pow(err, kExpo);
        if (err > 1.0) {
            ++traj.rejected;
            h /= std::min(1.0 / kFacMin, fac11 / kSafe);
            last_rejected = true;
            if (h < config.h_min) {
                traj.termination = Termination::step_floor;
                break;
            }
            continue;
        }

        ++traj.steps;
        double snew = last ? span_s : s + h;
        bool stop = false;

        if (!events.empty()) {
            std::vector<std::pair<double, std::size_t>> hits;
            std::vector<double> gnew(events.size());
            for (std::size_t i = 0; i < events.size(); ++i) {
                gnew[i] = events[i].g(ynew);
                if (sign_change(gprev[i], gnew[i], events[i].direction)) {
                    const double guess = hermite_guess(events[i], y, f0, ynew, f1, h, gprev[i]);
                    hits.emplace_back(guess, i);
                }
            }
            std::vector<std::pair<Located, std::size_t>> found;
            for (const auto& [guess, i] : hits) {
                auto prop = [&](double tau, std::vector<double>& out) { st.substep(y, f0, tau, out); };
                found.emplace_back(refine(events[i], prop, h, gprev[i], gnew[i], guess, n, false), i);
            }
            std::sort(found.begin(), found.end(),
                      [](const auto& l, const auto& r) {
                          return l.first.tau != r.first.tau ? l.first.tau < r.first.tau : l.second < r.second;
                      });
            for (auto& [loc, i] : found) {
                traj.events.push_back({time_of(s + loc.tau), loc.x, i});
                if (events[i].terminal) {
                    ynew = loc.x;
                    st.eval(ynew, f1);
                    snew = s + loc.tau;
                    stop = true;
                    break;
                }
            }
            gprev = gnew;
        }

        y.swap(ynew);
        f0.swap(f1);
        s = snew;
        if (config.record_samples || stop || last) {
            traj.push(time_of(s), y);
            pushed_final = true;
        } else {
            pushed_final = false;
        }
        if (stop) {
            traj.termination = Termination::terminal_event;
            break;
        }
        if (last) {
            traj.termination = Termination::reached_t1;
            break;
        }

        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        double hnew = h / fac;
        facold = std::max(err, 1e-4);
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        h = std::min(hnew, config.h_max);
        if (h < config.h_min || time_of(s + h) == time_of(s)) {
            traj.termination = Termination::step_floor;
            break;
        }
    }
    if (!pushed_final) traj.push(time_of(s), y);
    return traj;
}

EventPoint locate_event(const VectorField& field, double t_lo, std::span<const double> state_lo, double t_hi,
                        std::span<const double> state_hi, const EventSpec& event, const IntegratorConfig& config) {
    const std::size_t n = field.dimension;
    if (state_lo.size() != n || state_hi.size() != n) throw std::invalid_argument("state dimension mismatch");
    const double g_lo = event.g(state_lo);
    const double g_hi = event.g(state_hi);
    if (!(g_lo * g_hi < 0.0) || !sign_change(g_lo, g_hi, event.direction))
        throw std::runtime_error("no sign change of requested direction in bracket");

    const double h = t_hi - t_lo;
    const double dir = h > 0.0 ? 1.0 : -1.0;
    std::vector<double> f_lo(n), f_hi(n);
    field.rhs(state_lo, f_lo);
    field.rhs(state_hi, f_hi);
    // Hermite guess in the direction-normalized frame.
    for (auto& v : f_lo) v *= dir;
    for (auto& v : f_hi) v *= dir;
    const double guess = hermite_guess(event, state_lo, f_lo, state_hi, f_hi, std::abs(h), g_lo);

    IntegratorConfig sub = config;
    sub.record_samples = false;
    std::vector<double> x0(state_lo.begin(), state_lo.end());
    auto prop = [&](double tau, std::vector<double>& out) {
        if (tau == 0.0) {
            out = x0;
            return;
        }
        sub.h_init = std::clamp(std::min(std::abs(tau), sub.h_init), sub.h_min, sub.h_max);
        const auto tr = integrate(field, x0, t_lo, t_lo + dir * tau, sub);
        if (!tr.completed()) throw std::runtime_error("integration failed during event refinement");
        out = tr.final_state();
    };
    const Located loc = refine(event, prop, std::abs(h), g_lo, g_hi, guess, n, true);
    return {t_lo + dir * loc.tau, loc.x};
}

EventSpec blowup_sentinel(double bound) {
    EventSpec ev;
    ev.g = [bound](std::span<const double> x) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return bound - m;
    };
    ev.direction = Direction::falling;
    ev.terminal = true;
    ev.tolerance = 1e-6 * bound;
    return ev;
}

}  // namespace canard::ode
