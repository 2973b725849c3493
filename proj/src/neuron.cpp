#include "canard/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace canard::neuron {

void FullParams::validate() const {
    if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
    for (double g : {g_Na, g_K, g_L, g_Nap, g_Ks})
        if (!(g >= 0.0)) throw std::invalid_argument("conductances must be non-negative");
    if (!(tau_w > 0.0) || !(tau_p > 0.0)) throw std::invalid_argument("time constants must be positive");
    for (double x : {E_Na, E_K, E_L, I_app})
        if (!std::isfinite(x)) throw std::invalid_argument("parameters must be finite");
}

namespace {

// s / (exp(s) - 1), with the series near the removable singularity.
double exprel_inv(double s) {
    if (std::abs(s) < 1e-5) return 1.0 - s / 2.0 + s * s / 12.0;
    return s / std::expm1(s);
}

double sigmoid(double v, double half, double slope) { return 1.0 / (1.0 + std::exp(-(v - half) / slope)); }

}  // namespace

// The series branch covers |v - v_sing| < 1e-4, i.e. |s| < 1e-5.
double alpha_m(double v) { return exprel_inv(-0.1 * (v + 23.0)); }
double beta_m(double v) { return 4.0 * std::exp(-(v + 48.0) / 18.0); }
double alpha_h(double v) { return 0.07 * std::exp(-(v + 37.0) / 20.0); }
double beta_h(double v) { return 1.0 / (std::exp(-0.1 * (v + 7.0)) + 1.0); }
double alpha_n(double v) { return 0.1 * exprel_inv(-0.1 * (v + 27.0)); }
double beta_n(double v) { return 0.125 * std::exp(-(v + 37.0) / 80.0); }

double m_inf(double v) { return alpha_m(v) / (alpha_m(v) + beta_m(v)); }
double h_inf(double v) { return alpha_h(v) / (alpha_h(v) + beta_h(v)); }
double n_inf(double v) { return alpha_n(v) / (alpha_n(v) + beta_n(v)); }
double p_inf(double v) { return sigmoid(v, -38.0, 6.5); }
double w_inf(double v) { return sigmoid(v, -35.0, 6.5); }
double tau_n(double v) { return 1.0 / (alpha_n(v) + beta_n(v)); }

Gates gate_curves(double v, double tau_p) {
    const double am = alpha_m(v), bm = beta_m(v);
    const double ah = alpha_h(v), bh = beta_h(v);
    const double an = alpha_n(v), bn = beta_n(v);
    return {am / (am + bm), ah / (ah + bh), an / (an + bn), p_inf(v), w_inf(v),
            1.0 / (am + bm), 1.0 / (ah + bh), 1.0 / (an + bn), tau_p};
}

Currents currents(const FullState& s, const FullParams& p) {
    const double n2 = s.n * s.n;
    return {p.g_Na * s.m * s.m * s.m * s.h * (s.v - p.E_Na), p.g_K * n2 * n2 * (s.v - p.E_K),
            p.g_L * (s.v - p.E_L), p.g_Nap * s.p * (s.v - p.E_Na), p.g_Ks * s.w * (s.v - p.E_K)};
}

Currents currents(const ReducedState& s, const FullParams& p) {
    return currents(FullState{s.v, m_inf(s.v), h_inf(s.v), s.n, p_inf(s.v), s.w}, p);
}

FullState full_rhs(const FullState& s, const FullParams& p) {
    const Gates g = gate_curves(s.v, p.tau_p);
    return {(p.I_app - currents(s, p).total()) / p.C,
            (g.m_inf - s.m) / g.tau_m,
            (g.h_inf - s.h) / g.tau_h,
            (g.n_inf - s.n) / g.tau_n,
            (g.p_inf - s.p) / g.tau_p,
            (g.w_inf - s.w) / p.tau_w};
}

ReducedState reduced_rhs(const ReducedState& s, const FullParams& p) {
    return {(p.I_app - currents(s, p).total()) / p.C, (w_inf(s.v) - s.w) / p.tau_w, (n_inf(s.v) - s.n) / tau_n(s.v)};
}

Variant parse_variant(std::string_view name) {
    if (name == "full") return Variant::full;
    if (name == "reduced3") return Variant::reduced3;
    if (name == "modified3") return Variant::modified3;
    if (name == "full-noINa") return Variant::full_no_na;
    if (name == "full-noIK") return Variant::full_no_k;
    throw std::invalid_argument("unknown model variant: " + std::string(name));
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::reduced3: return "reduced3";
        case Variant::modified3: return "modified3";
        case Variant::full_no_na: return "full-noINa";
        case Variant::full_no_k: return "full-noIK";
    }
    return "unknown";
}

bool is_reduced(Variant v) { return v == Variant::reduced3 || v == Variant::modified3; }

std::size_t dimension(Variant v) { return is_reduced(v) ? 3 : 6; }

FullParams apply_variant(FullParams p, Variant v) {
    switch (v) {
        case Variant::modified3: p.g_Nap = 0.0; break;
        case Variant::full_no_na: p.g_Na = 0.0; break;
        case Variant::full_no_k: p.g_K = 0.0; break;
        default: break;
    }
    return p;
}

ode::VectorField make_field(Variant v, const FullParams& params) {
    params.validate();
    const FullParams p = apply_variant(params, v);
    if (is_reduced(v)) {
        return {3, [p](std::span<const double> x, std::span<double> dx) {
                    const auto d = reduced_rhs(ReducedState::from(x), p).to_array();
                    std::copy(d.begin(), d.end(), dx.begin());
                }};
    }
    return {6, [p](std::span<const double> x, std::span<double> dx) {
                const auto d = full_rhs(FullState::from(x), p).to_array();
                std::copy(d.begin(), d.end(), dx.begin());
            }};
}

std::vector<std::string> state_names(Variant v) {
    if (is_reduced(v)) return {"v", "w", "n"};
    return {"v", "m", "h", "n", "p", "w"};
}

std::vector<double> rest_guess(Variant v, const FullParams& params) {
    const FullParams p = apply_variant(params, v);
    auto full_at = [&](double u) { return FullState{u, m_inf(u), h_inf(u), n_inf(u), p_inf(u), w_inf(u)}; };
    const num::Scalar balance = [&](double u) { return p.I_app - currents(full_at(u), p).total(); };
    const auto br = num::scan_brackets(balance, -100.0, 50.0, 1501);
    if (br.empty()) throw std::runtime_error("no steady-state voltage on [-100, 50]");
    const double u = num::solve_bracketed(balance, br.front().lo, br.front().hi, 1e-13);
    const FullState s = full_at(u);
    if (is_reduced(v)) return {s.v, s.w, s.n};
    const auto a = s.to_array();
    return {a.begin(), a.end()};
}

std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
    }
    return "unknown";
}

std::string_view to_string(Criticality c) {
    switch (c) {
        case Criticality::subcritical: return "subcritical";
        case Criticality::supercritical: return "supercritical";
        case Criticality::inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

EquilibriumReport find_equilibrium(const ode::VectorField& field, std::span<const double> guess,
                                   const NewtonOptions& opt) {
    const std::size_t n = field.dimension;
    if (guess.size() != n) throw std::invalid_argument("guess dimension does not match field");
    std::vector<double> x(guess.begin(), guess.end()), fx = field(x), trial(n);
    double res = inf_norm(fx);
    int it = 0;
    for (; res > opt.tol; ++it) {
        if (it >= opt.max_iter) throw std::runtime_error("Newton iteration did not converge");
        const num::Matrix jac = num::jacobian_fd(field, x, opt.fd_step);
        Eigen::FullPivLU<num::Matrix> lu(jac);
        if (!lu.isInvertible()) throw std::runtime_error("singular Jacobian in Newton iteration");
        const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(fx.data(), static_cast<Eigen::Index>(n));
        const Eigen::VectorXd dx = lu.solve(-rhs);
        double lambda = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + lambda * dx[static_cast<Eigen::Index>(i)];
            const auto ft = field(trial);
            const double rt = inf_norm(ft);
            if (std::isfinite(rt) && rt < res) {
                x = trial;
                fx = ft;
                res = rt;
                improved = true;
                break;
            }
        }
        if (!improved) {
            if (res <= 100.0 * opt.tol) break;  // at the rounding floor
            throw std::runtime_error("Newton iteration stalled");
        }
    }
    EquilibriumReport rep;
    rep.state = x;
    rep.residual = res;
    rep.iterations = it;
    rep.jacobian = num::jacobian_fd(field, x, opt.fd_step);
    rep.eigenvalues = num::eigenvalues(rep.jacobian);
    const double lead = rep.eigenvalues.front().real();
    rep.stability = lead < -1e-9 ? Stability::stable : (lead > 1e-9 ? Stability::unstable : Stability::marginal);
    return rep;
}

EquilibriumReport equilibrium(Variant v, const FullParams& p) {
    return find_equilibrium(make_field(v, p), rest_guess(v, p));
}

HopfResult hopf_scan(const FullParams& params, Variant v, double I_lo, double I_hi, int grid, double tol) {
    if (!(I_hi > I_lo) || grid < 2) throw std::invalid_argument("invalid current range");
    auto at = [&](double I, std::span<const double> guess) {
        FullParams p = params;
        p.I_app = I;
        return find_equilibrium(make_field(v, p), guess);
    };
    auto lead = [](const EquilibriumReport& r) { return num::max_oscillatory_real(r.eigenvalues); };

    FullParams p0 = params;
    p0.I_app = I_lo;
    EquilibriumReport prev = at(I_lo, rest_guess(v, p0));
    double I_prev = I_lo, s_prev = lead(prev);
    for (int i = 1; i < grid; ++i) {
        const double I = I_lo + (I_hi - I_lo) * i / (grid - 1);
        EquilibriumReport cur;
        try {
            cur = at(I, prev.state);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string("equilibrium continuation failed: ") + e.what());
        }
        const double s = lead(cur);
        if (std::isfinite(s_prev) && std::isfinite(s) && (s_prev < 0.0) != (s < 0.0)) {
            double lo = I_prev, hi = I;
            double s_lo = s_prev, s_hi = s;
            EquilibriumReport e_lo = prev, e_hi = cur;
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                EquilibriumReport em = at(mid, e_lo.state);
                const double sm = lead(em);
                if (!std::isfinite(sm)) throw std::runtime_error("complex pair lost during Hopf bisection");
                if ((sm < 0.0) == (s_lo < 0.0)) {
                    lo = mid;
                    s_lo = sm;
                    e_lo = std::move(em);
                } else {
                    hi = mid;
                    s_hi = sm;
                    e_hi = std::move(em);
                }
            }
            HopfResult r;
            r.I_hopf = 0.5 * (lo + hi);
            r.bracket_lo = lo;
            r.bracket_hi = hi;
            r.re_lo = s_lo;
            r.re_hi = s_hi;
            r.at_hopf = at(r.I_hopf, e_lo.state);
            return r;
        }
        prev = std::move(cur);
        I_prev = I;
        s_prev = s;
    }
    throw std::runtime_error("no Hopf crossing in current range");
}

namespace {

struct Window {
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    int spikes = 0;
    bool ok = true;
};

// Runs [0, settle] unrecorded then records v over [settle, settle + window].
Window late_window(const ode::VectorField& f, std::vector<double> x0, double settle, double window,
                   double threshold) {
    ode::IntegratorConfig cfg;
    cfg.h_max = 1.0;
    Window w;
    if (settle > 0.0) {
        cfg.record_samples = false;
        const auto pre = ode::integrate(f, x0, 0.0, settle, cfg);
        if (!pre.completed()) {
            w.ok = false;
            return w;
        }
        x0 = pre.final_state();
    }
    cfg.record_samples = true;
    const auto tr = ode::integrate(f, x0, settle, settle + window, cfg);
    if (!tr.completed()) w.ok = false;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double v = tr.value(i, 0);
        w.vmin = std::min(w.vmin, v);
        w.vmax = std::max(w.vmax, v);
        if (i > 0 && tr.value(i - 1, 0) < threshold && v >= threshold) ++w.spikes;
    }
    return w;
}

}  // namespace

CriticalityReport classify_criticality(Variant v, const FullParams& params, double I_hopf,
                                       const CriticalityProbe& probe) {
    CriticalityReport rep;
    auto eq_at = [&](double I) {
        FullParams p = params;
        p.I_app = I;
        return std::pair{make_field(v, p), equilibrium(v, p)};
    };

    {
        auto [f, eq] = eq_at(I_hopf - probe.delta);
        auto x0 = eq.state;
        x0[0] += probe.kick;
        const Window w = late_window(f, x0, 0.5 * probe.t_probe, 0.5 * probe.t_probe, probe.spike_threshold);
        rep.spikes_below = w.spikes;
        if (w.ok && w.spikes >= 2) {
            rep.bistable_below = true;
            rep.kind = Criticality::subcritical;
            rep.note = "sustained spiking coexists with the stable equilibrium below I_hopf";
            return rep;
        }
    }

    auto amplitude = [&](double I, bool& spiking) {
        auto [f, eq] = eq_at(I);
        auto x0 = eq.state;
        x0[0] += probe.onset_kick;
        const Window w = late_window(f, x0, 0.8 * probe.t_onset, 0.2 * probe.t_onset, probe.spike_threshold);
        spiking = w.spikes > 0;
        return w.ok ? w.vmax - w.vmin : std::numeric_limits<double>::quiet_NaN();
    };
    bool spike_near = false, spike_far = false;
    rep.amp_near = amplitude(I_hopf + 0.25 * probe.delta, spike_near);
    rep.amp_far = amplitude(I_hopf + probe.delta, spike_far);
    if (!std::isfinite(rep.amp_near) || !std::isfinite(rep.amp_far)) {
        rep.note = "integration failed in onset probe";
        return rep;
    }
    if (spike_near) {
        rep.kind = Criticality::subcritical;
        rep.note = "large-amplitude spiking immediately above I_hopf";
        return rep;
    }
    if (rep.amp_near < 1e-3 || rep.amp_far < 1e-3) {
        rep.note = "no sustained oscillation above I_hopf";
        return rep;
    }
    rep.onset_exponent = std::log(rep.amp_far / rep.amp_near) / std::log(4.0);
    if (rep.onset_exponent >= probe.min_exponent) {
        rep.kind = Criticality::supercritical;
        rep.note = "amplitude grows continuously from zero";
    } else {
        rep.kind = Criticality::subcritical;
        rep.note = "finite amplitude at onset";
    }
    return rep;
}

}  // namespace canard::neuron
