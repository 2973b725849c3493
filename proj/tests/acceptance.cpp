// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "canard/canonical.hpp"
#include "canard/mmo.hpp"
#include "canard/neuron.hpp"
#include "canard/numerics.hpp"
#include "canard/ode.hpp"
#include "canard/reduction.hpp"

using namespace canard;
namespace cn = canard::canonical;
namespace ref = canard::canonical::reference;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "MISS ") + what;
    }
};

std::string fmt(const char* f, double x) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

bool near(double x, double target, double tol) { return std::abs(x - target) <= tol; }

// ------------------------------------------------------------------ 1

Verdict exact_solution() {
    Verdict v;
    const double mu0 = cn::mu_bar_0(ref::a, ref::b);
    const cn::MicroParams p{mu0, ref::a, ref::b, 0.0, cn::kD1};
    double worst = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = -100.0 + 0.01 * i;
        const auto g = cn::gamma_poly(t, 0.0, ref::a, ref::b);
        const auto dg = cn::gamma_poly_dot(t, 0.0, ref::a, ref::b);
        const auto f = cn::micro_rhs(g, p);
        for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(dg[k] - f[k]));
    }
    v.require(worst < 1e-10, fmt("max residual %.3g", worst));
    v.require(near(mu0, 0.1238928363, 1e-6), fmt("mu_bar_0 = %.10f", mu0));
    return v;
}

// ------------------------------------------------------------------ 2

Verdict hopf_formula() {
    Verdict v;
    const auto r = cn::hopf_roots(ref::a, ref::b);
    v.require(near(r.mu1, 0.06692624850, 1e-8), fmt("mu1 = %.11f", r.mu1));
    v.require(near(r.mu2, 0.4493251582, 1e-8), fmt("mu2 = %.10f", r.mu2));

    const auto e1 = num::eigenvalues(cn::micro_linearization(r.mu1, ref::a, ref::b));
    const double re1 = num::max_oscillatory_real(e1);
    v.require(std::isfinite(re1) && std::abs(re1) < 1e-8, fmt("|Re| of imaginary pair at mu1 %.2g", std::abs(re1)));

    // second root: no oscillatory pair, a real pair of zero sum (extraneous)
    const auto e2 = num::eigenvalues(cn::micro_linearization(r.mu2, ref::a, ref::b));
    bool any_complex = false;
    double best_sum = std::numeric_limits<double>::infinity(), pair = 0.0;
    for (std::size_t i = 0; i < e2.size(); ++i) {
        any_complex = any_complex || std::abs(e2[i].imag()) > 1e-9;
        for (std::size_t j = i + 1; j < e2.size(); ++j) {
            const double s = std::abs(e2[i].real() + e2[j].real());
            if (s < best_sum) best_sum = s, pair = std::abs(e2[i].real());
        }
    }
    v.require(!any_complex && best_sum < 1e-8,
              fmt("mu2 extraneous: real pair +-%.4f", pair) + fmt(" with sum %.2g", best_sum));
    return v;
}

// ------------------------------------------------------------------ 3

Verdict extraction() {
    Verdict v;
    const auto ex = reduction::extract_canonical(reduction::modified_params(17.1));
    const auto& c = ex.canonical;
    auto rel = [](double x, double t) { return std::abs(x - t) / std::abs(t); };
    v.require(rel(c.eps, ref::eps) < 0.01, fmt("eps %.10f", c.eps));
    v.require(rel(c.mu, ref::mu) < 0.01, fmt("mu %.10f", c.mu) + fmt(" (ratio %.4f)", ref::mu / c.mu));
    v.require(rel(c.a, ref::a) < 0.01, fmt("a %.10f", c.a));
    v.require(rel(c.b, ref::b) < 0.01, fmt("b %.10f", c.b));
    return v;
}

// ------------------------------------------------------------------ 4

Verdict folded_node() {
    Verdict v;
    const auto fold = reduction::folded_singularity(reduction::modified_params(17.1));
    v.require(fold.eig_desing[0] < 0.0 && fold.eig_desing[1] < 0.0,
              fmt("eigenvalues %.4g", fold.eig_desing[0]) + fmt(", %.4g", fold.eig_desing[1]));
    return v;
}

// ------------------------------------------------------------------ 5

Verdict neuron_hopf() {
    Verdict v;
    struct Case {
        neuron::Variant var;
        double lo, hi, target, tol;
        neuron::Criticality kind;
        const char* name;
    };
    const Case cases[] = {
        {neuron::Variant::full, 0.5, 1.5, 0.994, 0.01, neuron::Criticality::subcritical, "full"},
        {neuron::Variant::full_no_k, 0.5, 1.2, 0.775, 0.01, neuron::Criticality::subcritical, "noIK"},
        {neuron::Variant::modified3, 16.0, 18.0, 16.93, 0.02, neuron::Criticality::subcritical, "modified3"},
        {neuron::Variant::full_no_na, 1.2, 2.4, 1.784, 0.02, neuron::Criticality::supercritical, "noINa"},
    };
    for (const auto& c : cases) {
        const neuron::FullParams p = neuron::apply_variant({}, c.var);
        const auto h = neuron::hopf_scan(p, c.var, c.lo, c.hi);
        const auto cr = neuron::classify_criticality(c.var, p, h.I_hopf);
        v.require(near(h.I_hopf, c.target, c.tol) && cr.kind == c.kind,
                  std::string(c.name) + fmt(" %.4f ", h.I_hopf) + std::string(neuron::to_string(cr.kind)));
    }
    return v;
}

// ------------------------------------------------------------------ 6

Verdict regime_map() {
    Verdict v;
    auto sig = [](double I) {
        return mmo::neuron_signature(neuron::Variant::modified3, reduction::modified_params(I));
    };
    const auto s0 = sig(16.95), s1 = sig(17.1), s2 = sig(17.9), s3 = sig(18.5);
    v.require(s0.regime == mmo::Regime::sto_only, "16.95 " + std::string(mmo::to_string(s0.regime)));
    const bool multi = s1.regime == mmo::Regime::mmo && !s1.blocks.empty() &&
                       std::all_of(s1.blocks.begin(), s1.blocks.end(), [](const auto& b) { return b.s >= 2; });
    v.require(multi, "17.1 " + s1.pattern());
    v.require(s2.regime == mmo::Regime::mmo && s2.pattern() == "1^1", "17.9 " + s2.pattern());
    v.require(s3.regime == mmo::Regime::spiking, "18.5 " + std::string(mmo::to_string(s3.regime)));
    return v;
}

// ------------------------------------------------------------------ 7

Verdict canard_connection() {
    Verdict v;
    const cn::MicroParams p{0.0, ref::a, ref::b, ref::eps, cn::kD1};
    mmo::GapOptions g;
    g.workers = 4;
    const auto c = mmo::find_canard_mu(p, 0.128, 0.148, 1e-6, g);
    v.require(near(c.mu_bar, 0.1381943, 0.002) && c.gap_lo * c.gap_hi < 0.0,
              fmt("canard %.7f", c.mu_bar) + fmt(" gaps %.2g", c.gap_lo) + fmt("/%.2g", c.gap_hi));
    const auto t = mmo::mmo_to_spiking_threshold(p, 0.12, 0.16);
    v.require(t.mu_star >= 0.138 && t.mu_star <= 0.139, fmt("threshold %.5f", t.mu_star));
    return v;
}

// ------------------------------------------------------------------ 8

Verdict transition() {
    Verdict v;
    const double eps[] = {0.25, 0.2, 0.15, 0.1};
    const cn::MicroParams base{0.0, ref::a, ref::b, ref::eps, cn::kD1};
    const auto c = mmo::transition_curve(eps, base, 0.11, 0.16, 1e-4, 4);
    std::string vals;
    for (const auto& s : c.samples) vals += fmt(" %.5f", s.mu_star);
    v.require(c.samples.size() == 4 && c.decreasing, "mu*:" + vals);
    v.require(near(c.mu_limit, 0.1238928363, 0.01), fmt("limit %.5f", c.mu_limit));
    return v;
}

// ------------------------------------------------------------------ 9

double h_drift(const ode::Trajectory& tr) {
    const double h0 = tr.value(0, 1) * tr.value(0, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
        worst = std::max(worst, std::abs(tr.value(i, 1) * tr.value(i, 3) - h0) / std::abs(h0));
    return worst;
}

Verdict conservation_conjugacy() {
    Verdict v;
    const ode::IntegratorConfig tight{1e-12, 1e-14};
    const ode::IntegratorConfig cfg{1e-10, 1e-12};
    const double tol10 = 10.0 * cfg.rtol;

    // H = omega sigma along forward and backward shooting segments in the extended chart
    double drift = 0.0;
    ode::EventSpec section;
    section.g = [](std::span<const double> s) { return s[0]; };
    section.terminal = true;
    const ode::EventSpec ev[] = {section, ode::blowup_sentinel(1e3)};
    for (double mu : {0.12, 0.138, 0.145}) {
        const cn::MicroParams p{mu, ref::a, ref::b, ref::eps, cn::kD1};
        const auto field = cn::sigma_field(p, cn::SigmaChart::extended);
        const auto s = cn::micro_to_sigma(cn::s1d_seed_micro(cn::kDefaultRho, p));
        drift = std::max(drift, h_drift(ode::integrate(field, std::vector<double>{s[0], s[1], s[2], p.eps / s[1]}, 0, 200, tight, ev)));
        for (double z0 : {1.5, 2.0}) {
            const auto r = cn::micro_to_sigma({5.0, 10.0, z0});
            drift = std::max(drift,
                             h_drift(ode::integrate(field, std::vector<double>{r[0], r[1], r[2], p.eps / r[1]}, 0, -200, tight, ev)));
        }
    }
    v.require(drift < 1e-8, fmt("H drift %.2g", drift));

    // canon <-> micro: canon time T is micro time eps T
    const cn::MicroParams mp{0.12, ref::a, ref::b, ref::eps, cn::kD1};
    const cn::CanonicalParams cp{mp.eps, mp.eps * mp.mu_bar, mp.a, mp.b, mp.D1};
    const auto m0 = cn::s1d_seed_micro(cn::kDefaultRho, mp);
    const auto c0 = cn::micro_to_canon(m0, mp.eps);
    const double Tm = 20.0;
    const auto trm = ode::integrate(cn::micro_field(mp), m0, 0, Tm, cfg);
    const auto trc = ode::integrate(cn::canon_field(cp), c0, 0, Tm / mp.eps, cfg);
    const auto mc = trm.final_state();
    const auto back = cn::canon_to_micro({trc.final_state()[0], trc.final_state()[1], trc.final_state()[2]}, mp.eps);
    double dcm = 0.0, scale = 1.0;
    for (int k = 0; k < 3; ++k) dcm = std::max(dcm, std::abs(back[k] - mc[k])), scale = std::max(scale, std::abs(mc[k]));
    v.require(dcm / scale < tol10, fmt("canon/micro %.2g", dcm / scale));

    // micro <-> sigma: orbit overlap at the first crossing of xb = -1
    ode::EventSpec xm;
    xm.g = [](std::span<const double> s) { return s[0] + 1.0; };
    xm.direction = ode::Direction::rising;
    xm.terminal = true;
    ode::EventSpec xs = xm;
    xs.g = [](std::span<const double> s) { return s[0] + s[1]; };  // xt = sigma xb
    const ode::EventSpec em[] = {xm};
    const ode::EventSpec es[] = {xs};
    const auto hm = ode::integrate(cn::micro_field(mp), m0, 0, 100, cfg, em);
    const auto hs = ode::integrate(cn::sigma_field(mp, cn::SigmaChart::rescc), cn::micro_to_sigma(m0), 0, 100, cfg, es);
    double dms = std::numeric_limits<double>::infinity();
    if (!hm.events.empty() && !hs.events.empty()) {
        const auto a = hm.events.back().x;
        const auto b = cn::sigma_to_micro({hs.events.back().x[0], hs.events.back().x[1], hs.events.back().x[2]});
        dms = 0.0;
        for (int k = 0; k < 3; ++k) dms = std::max(dms, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(a[k])));
    }
    v.require(dms < tol10, fmt("micro/sigma %.2g", dms));

    // super-slow manifold: seeds at rho and 1.5 rho meet at the section
    const cn::MicroParams sp{0.13, ref::a, ref::b, ref::eps, cn::kD1};
    const auto f1 = mmo::continue_s1d_forward(sp, cn::kDefaultRho);
    const auto f2 = mmo::continue_s1d_forward(sp, 1.5 * cn::kDefaultRho);
    const double dss = std::max(std::abs(f1.x[1] - f2.x[1]), std::abs(f1.x[2] - f2.x[2]));
    v.require(dss < 1e-4, fmt("two-seed %.2g", dss));
    return v;
}

// ----------------------------------------------------------------- 10

Verdict equilibrium_ratio() {
    Verdict v;
    const auto eq = neuron::equilibrium(neuron::Variant::modified3, reduction::modified_params(17.1));
    double re_pair = 0.0, real_eig = 0.0;
    for (const auto& e : eq.eigenvalues) {
        if (std::abs(e.imag()) > 1e-9)
            re_pair = e.real();
        else
            real_eig = e.real();
    }
    const double ratio = real_eig / re_pair;
    v.require(std::abs(ratio + 30.0) <= 6.0, fmt("ratio %.2f", ratio));
    return v;
}

// ----------------------------------------------------------------- 11

Verdict large_mu() {
    Verdict v;
    auto run = [](double eps, double mu) {
        return mmo::large_mu_no_mmo(cn::MicroParams{mu, ref::a, ref::b, eps, cn::kD1});
    };
    const auto r1 = run(0.05, 5.0), r2 = run(ref::eps, 10.0), r3 = run(0.05, 0.13);
    v.require(r1.no_mmo, "(0.05,5) " + std::string(mmo::to_string(r1.signature.regime)));
    v.require(r2.no_mmo, "(eps_d,10) " + std::string(mmo::to_string(r2.signature.regime)));
    v.require(!r3.no_mmo, "(0.05,0.13) " + std::string(mmo::to_string(r3.signature.regime)) + " " +
                              r3.signature.pattern());
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"exact solution and mu_bar_0", exact_solution},
        {"Hopf-root formula", hopf_formula},
        {"canonical extraction", extraction},
        {"folded node", folded_node},
        {"neuron Hopf points and criticality", neuron_hopf},
        {"MMO regime map", regime_map},
        {"canard connection", canard_connection},
        {"transition-curve trend", transition},
        {"conservation and conjugacy", conservation_conjugacy},
        {"equilibrium eigenvalue ratio", equilibrium_ratio},
        {"large mu_bar without MMO", large_mu},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !v.pass;
        std::printf("%s %2zu %s [%.2fs]: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
