#include "canard/mmo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "canard/sweep.hpp"

namespace canard::mmo {

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::steady: return "steady";
        case Regime::sto_only: return "sto_only";
        case Regime::mmo: return "mmo";
        case Regime::spiking: return "spiking";
    }
    return "unknown";
}

// ---------------------------------------------------------------- extrema

namespace {

// Vertex of the parabola through three samples; falls back to the middle
// sample when the fit is degenerate.
std::pair<double, double> parabola_peak(double t0, double v0, double t1, double v1, double t2, double v2) {
    const double d0 = (v1 - v0) / (t1 - t0);
    const double d1 = (v2 - v1) / (t2 - t1);
    const double c2 = (d1 - d0) / (t2 - t0);
    if (c2 == 0.0 || !std::isfinite(c2)) return {t1, v1};
    const double c1 = d0 - c2 * (t0 + t1);
    const double tv = -c1 / (2.0 * c2);
    if (!(tv >= t0 && tv <= t2)) return {t1, v1};
    const double val = v1 + (tv - t1) * (d0 + c2 * (tv - t0));
    return {tv, val};
}

}  // namespace

std::vector<Extremum> find_extrema(const ode::Trajectory& tr, std::size_t var, double t_from, double min_prominence) {
    std::vector<Extremum> raw;
    const std::size_t n = tr.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (tr.time(i) < t_from) continue;
        const double a = tr.value(i - 1, var), b = tr.value(i, var), c = tr.value(i + 1, var);
        const bool is_max = a < b && b >= c;
        const bool is_min = a > b && b <= c;
        if (!is_max && !is_min) continue;
        const auto [t, v] = parabola_peak(tr.time(i - 1), a, tr.time(i), b, tr.time(i + 1), c);
        raw.push_back({t, v, is_max});
    }
    std::vector<Extremum> st;
    auto more_extreme = [](const Extremum& e, const Extremum& ref) {
        return e.is_max ? e.value > ref.value : e.value < ref.value;
    };
    for (const auto& e : raw) {
        if (!st.empty() && st.back().is_max == e.is_max) {
            if (more_extreme(e, st.back())) st.back() = e;
            continue;
        }
        // a reversal smaller than the prominence floor is a ripple
        if (!st.empty() && std::abs(e.value - st.back().value) < min_prominence) continue;
        st.push_back(e);
    }
    return st;
}

// ------------------------------------------------------------- signatures

std::string MMOSignature::pattern() const {
    if (blocks.empty()) return regime == Regime::steady ? "steady" : "";
    const std::size_t count = periodic ? static_cast<std::size_t>(period) : std::min<std::size_t>(blocks.size(), 8);
    std::ostringstream os;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) os << ' ';
        os << blocks[i].L << '^' << blocks[i].s;
    }
    if (!periodic && blocks.size() > count) os << " ...";
    return os.str();
}

SignatureOptions neuron_signature_options() { return {}; }

SignatureOptions micro_signature_options(const MicroParams& p) {
    SignatureOptions o;
    o.var = 0;
    // Right fold of y = x^2 + D1 x^3 sits at x = -2 / (3 D1) in canonical units.
    o.spike_threshold = p.eps > 0.0 ? -2.0 / (3.0 * p.D1) / p.eps : std::numeric_limits<double>::infinity();
    o.sto_low = -3.0;
    o.sto_high = 3.0;
    o.min_prominence = 1e-3;
    return o;
}

MMOSignature classify_signature(const ode::Trajectory& tr, const SignatureOptions& opt) {
    if (tr.size() < 3 || !(tr.final_time() > tr.time(0))) throw std::invalid_argument("trace too short to classify");
    const double t0 = tr.time(0);
    const double t_from = t0 + opt.transient_fraction * (tr.final_time() - t0);
    const auto ext = find_extrema(tr, opt.var, t_from, opt.min_prominence);

    MMOSignature sig;
    std::vector<char> labels;
    for (const auto& e : ext) {
        if (!e.is_max) continue;
        if (e.value > opt.spike_threshold) {
            labels.push_back('L');
            ++sig.spikes;
        } else if (e.value >= opt.sto_low && e.value <= opt.sto_high) {
            labels.push_back('S');
            ++sig.small;
        } else {
            ++sig.unclassified;
        }
    }
    if (labels.empty()) {
        sig.regime = Regime::steady;
        return sig;
    }
    if (sig.spikes == 0) {
        sig.regime = Regime::sto_only;
        sig.blocks = {{0, sig.small}};
        return sig;
    }
    if (sig.small == 0) {
        sig.regime = Regime::spiking;
        sig.blocks.assign(static_cast<std::size_t>(sig.spikes), Block{1, 0});
        sig.periodic = true;
        sig.period = 1;
        return sig;
    }

    // Blocks start at an L-run; a leading partial S-run is dropped.
    std::size_t i = 0;
    while (i < labels.size() && labels[i] == 'S') ++i;
    while (i < labels.size()) {
        Block b;
        while (i < labels.size() && labels[i] == 'L') ++b.L, ++i;
        while (i < labels.size() && labels[i] == 'S') ++b.s, ++i;
        sig.blocks.push_back(b);
    }
    // The last block may be cut short by the end of the trace.
    if (sig.blocks.size() >= 2) sig.blocks.pop_back();

    const bool any_mixed =
        std::any_of(sig.blocks.begin(), sig.blocks.end(), [](const Block& b) { return b.L >= 1 && b.s >= 1; });
    sig.regime = any_mixed ? Regime::mmo : Regime::spiking;

    const std::size_t nb = sig.blocks.size();
    for (std::size_t p = 1; 2 * p <= nb; ++p) {
        bool ok = true;
        for (std::size_t k = 0; k + p < nb && ok; ++k) ok = sig.blocks[k] == sig.blocks[k + p];
        if (ok) {
            sig.periodic = true;
            sig.period = static_cast<int>(p);
            break;
        }
    }
    return sig;
}

int rotation_type(const ode::Trajectory& tr, double delta, double eps, double degeneracy) {
    auto inside = [&](std::size_t i) {
        for (std::size_t k = 0; k < 3; ++k)
            if (std::abs(tr.value(i, k)) > delta) return false;
        return true;
    };
    std::size_t entry = 0;
    bool found = false;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        if (!inside(i - 1) && inside(i)) {
            entry = i;
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("trajectory never enters the cube");
    std::size_t exit = entry;
    while (exit < tr.size() && inside(exit)) ++exit;

    int k = 0;
    for (std::size_t i = entry + 1; i + 1 < exit; ++i) {
        const double d1 = tr.value(i, 0) - tr.value(i - 1, 0);
        const double d2 = tr.value(i + 1, 0) - tr.value(i, 0);
        if ((d1 > 0.0 && d2 <= 0.0) || (d1 < 0.0 && d2 >= 0.0)) {
            const double xpp = -eps * eps * (tr.value(i, 0) - tr.value(i, 2));
            if (std::abs(xpp) > degeneracy) ++k;
        }
    }
    return k;
}

ode::Trajectory to_canonical(const ode::Trajectory& m, double eps) {
    ode::Trajectory out(3);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Vec3 c = canonical::micro_to_canon({m.value(i, 0), m.value(i, 1), m.value(i, 2)}, eps);
        out.push(m.time(i), c);
    }
    out.termination = m.termination;
    out.steps = m.steps;
    return out;
}

// ------------------------------------------------------------ simulations

ode::Trajectory simulate_neuron(neuron::Variant v, const neuron::FullParams& p, double t_max, double v_offset) {
    std::vector<double> x0;
    try {
        x0 = neuron::equilibrium(v, p).state;
    } catch (const std::runtime_error&) {
        x0 = neuron::rest_guess(v, p);
    }
    x0[0] += v_offset;
    ode::IntegratorConfig cfg{1e-8, 1e-10};
    cfg.h_max = 0.5;
    return ode::integrate(neuron::make_field(v, p), x0, 0.0, t_max, cfg);
}

MMOSignature neuron_signature(neuron::Variant v, const neuron::FullParams& p, double t_max) {
    const auto tr = simulate_neuron(v, p, t_max);
    if (!tr.completed()) throw std::runtime_error("neuron simulation failed: " + std::string(ode::to_string(tr.termination)));
    return classify_signature(tr, neuron_signature_options());
}

ode::Trajectory simulate_micro(const MicroParams& p, double rho, const SimOptions& opt) {
    if (!(p.eps > 0.0)) throw std::invalid_argument("S1D seeding needs eps > 0");
    const Vec3 seed = canonical::s1d_seed_micro(rho, p);
    const ode::EventSpec guard[] = {ode::blowup_sentinel()};
    return ode::integrate(canonical::micro_field(p), seed, 0.0, opt.t_max, opt.config, guard);
}

MMOSignature micro_signature(const MicroParams& p, double rho, const SimOptions& opt) {
    const auto tr = simulate_micro(p, rho, opt);
    if (tr.termination != ode::Termination::reached_t1)
        throw std::runtime_error("microscope simulation stopped early: " + std::string(ode::to_string(tr.termination)));
    return classify_signature(tr, micro_signature_options(p));
}

// --------------------------------------------------------------- shooting

namespace {

SectionPoint shoot(const MicroParams& p, const Vec3& start, double t_end, ode::Direction dir, const ShootOptions& opt) {
    ode::EventSpec section;
    section.g = [](std::span<const double> x) { return x[0]; };
    section.direction = dir;
    section.terminal = true;
    const ode::EventSpec events[] = {section, ode::blowup_sentinel(opt.blowup)};
    ode::IntegratorConfig cfg = opt.config;
    cfg.record_samples = false;
    const auto tr = ode::integrate(canonical::micro_field(p), start, 0.0, t_end, cfg, events);
    if (tr.termination == ode::Termination::terminal_event && !tr.events.empty()) {
        const auto& ev = tr.events.back();
        if (ev.index == 0) return {ev.t, {ev.x[0], ev.x[1], ev.x[2]}};
        throw std::runtime_error("blow-up before reaching the section");
    }
    if (tr.termination == ode::Termination::reached_t1) throw std::runtime_error("no section crossing within time budget");
    throw std::runtime_error("integration failed before the section: " + std::string(ode::to_string(tr.termination)));
}

}  // namespace

SectionPoint forward_to_section(const MicroParams& p, const Vec3& seed, const ShootOptions& opt) {
    return shoot(p, seed, opt.t_max, ode::Direction::rising, opt);
}

SectionPoint continue_s1d_forward(const MicroParams& p, double rho, const ShootOptions& opt) {
    return forward_to_section(p, canonical::s1d_seed_micro(rho, p), opt);
}

SectionPoint continue_special_forward(const MicroParams& p, double sigma0, const ShootOptions& opt) {
    return forward_to_section(p, canonical::asymptotic_seed_special(p.mu_bar, p.a, p.b, sigma0), opt);
}

SectionPoint backward_to_section(const MicroParams& p, double z0, const ShootOptions& opt, double x_start,
                                 double y_start) {
    return shoot(p, {x_start, y_start, z0}, -opt.t_max, ode::Direction::any, opt);
}

namespace {

void sort_by_y(std::vector<SlicePoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const SlicePoint& l, const SlicePoint& r) {
        return l.section.x[1] != r.section.x[1] ? l.section.x[1] < r.section.x[1] : l.z0 < r.z0;
    });
}

}  // namespace

RepellingSlice repelling_manifold_slice(const MicroParams& p, std::span<const double> z_grid, const ShootOptions& opt,
                                        int workers) {
    const std::vector<double> grid(z_grid.begin(), z_grid.end());
    const auto res = sweep::map<SectionPoint>(grid.size(), workers,
                                              [&](std::size_t i) { return backward_to_section(p, grid[i], opt); });
    RepellingSlice out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (res[i].ok())
            out.points.push_back({grid[i], *res[i].value});
        else
            out.dropped.push_back({grid[i], res[i].error});
    }
    sort_by_y(out.points);
    return out;
}

CanardGapReport canard_gap(const MicroParams& p, const GapOptions& opt) {
    CanardGapReport rep;
    rep.mu_bar = p.mu_bar;
    rep.eps = p.eps;
    auto kind = opt.seed.kind;
    if (kind == ForwardSeed::Kind::automatic) kind = p.eps > 0.0 ? ForwardSeed::Kind::s1d : ForwardSeed::Kind::special;
    switch (kind) {
        case ForwardSeed::Kind::automatic:
        case ForwardSeed::Kind::s1d: rep.forward_point = continue_s1d_forward(p, opt.seed.rho, opt.shoot); break;
        case ForwardSeed::Kind::special:
            rep.forward_point = continue_special_forward(p, opt.seed.sigma0, opt.shoot);
            break;
        case ForwardSeed::Kind::explicit_point:
            rep.forward_point = forward_to_section(p, opt.seed.point, opt.shoot);
            break;
    }
    const double ystar = rep.forward_point.x[1];

    std::vector<double> grid(static_cast<std::size_t>(opt.z_points));
    for (int i = 0; i < opt.z_points; ++i) grid[i] = opt.z_lo + (opt.z_hi - opt.z_lo) * i / (opt.z_points - 1);
    const auto res = sweep::map<SectionPoint>(grid.size(), opt.workers,
                                              [&](std::size_t i) { return backward_to_section(p, grid[i], opt.shoot); });
    std::vector<SlicePoint> pts;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (res[i].ok())
            pts.push_back({grid[i], *res[i].value});
        else
            rep.dropped.push_back({grid[i], res[i].error});
    }

    // Bracket in z0: a crossing below the target yb, followed by a crossing
    // above it or by a trajectory that no longer reaches the section.
    auto below = [&](std::size_t i) { return res[i].ok() && res[i].value->x[1] < ystar; };
    std::optional<std::size_t> at;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (below(i) && !below(i + 1)) {
            at = i;
            break;
        }
    }
    if (!at) {
        rep.repelling_slice = pts;
        sort_by_y(rep.repelling_slice);
        throw std::runtime_error("forward section point lies outside the repelling slice");
    }
    double za = grid[*at], zb = grid[*at + 1];
    SectionPoint sa = *res[*at].value;
    std::optional<SectionPoint> sb;
    if (res[*at + 1].ok()) sb = *res[*at + 1].value;

    const double ytol = opt.y_tol * std::max(1.0, std::abs(ystar));
    for (int it = 0; it < 200 && std::abs(sa.x[1] - ystar) > ytol && zb - za > 1e-15 * std::abs(zb); ++it) {
        const double zm = 0.5 * (za + zb);
        try {
            const SectionPoint sm = backward_to_section(p, zm, opt.shoot);
            pts.push_back({zm, sm});
            if (sm.x[1] < ystar) {
                za = zm;
                sa = sm;
            } else {
                zb = zm;
                sb = sm;
            }
        } catch (const std::runtime_error& e) {
            rep.dropped.push_back({zm, e.what()});
            zb = zm;
            sb.reset();
        }
    }
    double zmatch = sa.x[2];
    rep.z0_match = za;
    if (sb && sb->x[1] != sa.x[1]) {
        const double w = (ystar - sa.x[1]) / (sb->x[1] - sa.x[1]);
        zmatch = sa.x[2] + w * (sb->x[2] - sa.x[2]);
        rep.z0_match = za + w * (zb - za);
    }
    rep.gap = rep.forward_point.x[2] - zmatch;
    sort_by_y(pts);
    rep.repelling_slice = std::move(pts);
    return rep;
}

CanardResult find_canard_mu(const MicroParams& p, double lo, double hi, double tol, const GapOptions& opt) {
    auto gap = [&](double mu) {
        MicroParams q = p;
        q.mu_bar = mu;
        return canard_gap(q, opt).gap;
    };
    CanardResult r;
    r.lo = lo;
    r.hi = hi;
    r.gap_lo = gap(lo);
    r.gap_hi = gap(hi);
    if ((r.gap_lo < 0.0) == (r.gap_hi < 0.0)) throw std::runtime_error("canard gap has no sign change in bracket");
    while (r.hi - r.lo > tol) {
        const double mid = 0.5 * (r.lo + r.hi);
        const double gm = gap(mid);
        ++r.iterations;
        if ((gm < 0.0) == (r.gap_lo < 0.0)) {
            r.lo = mid;
            r.gap_lo = gm;
        } else {
            r.hi = mid;
            r.gap_hi = gm;
        }
    }
    r.mu_bar = 0.5 * (r.lo + r.hi);
    return r;
}

// ------------------------------------------------------------ transition

ThresholdResult mmo_to_spiking_threshold(const MicroParams& p, double lo, double hi, double tol, const SimOptions& sim) {
    auto classify = [&](double mu) {
        MicroParams q = p;
        q.mu_bar = mu;
        return micro_signature(q, canonical::kDefaultRho, sim);
    };
    ThresholdResult r;
    r.eps = p.eps;
    r.lo = lo;
    r.hi = hi;
    MMOSignature s_lo = classify(lo), s_hi = classify(hi);
    if ((s_lo.regime == Regime::spiking) == (s_hi.regime == Regime::spiking)) {
        std::ostringstream os;
        os << "same classification at both ends (" << to_string(s_lo.regime) << ", " << to_string(s_hi.regime) << ")";
        throw std::runtime_error(os.str());
    }
    if (s_lo.regime == Regime::spiking) throw std::runtime_error("bracket must have the spiking end above");
    while (r.hi - r.lo > tol) {
        const double mid = 0.5 * (r.lo + r.hi);
        MMOSignature s = classify(mid);
        ++r.iterations;
        if (s.regime == Regime::spiking) {
            r.hi = mid;
            s_hi = std::move(s);
        } else {
            r.lo = mid;
            s_lo = std::move(s);
        }
    }
    r.mu_star = 0.5 * (r.lo + r.hi);
    r.regime_lo = s_lo.regime;
    r.regime_hi = s_hi.regime;
    r.pattern_lo = s_lo.pattern();
    return r;
}

double extrapolate_to_zero(std::span<const double> eps, std::span<const double> mu) {
    const auto n = static_cast<Eigen::Index>(eps.size());
    if (n == 0 || eps.size() != mu.size()) throw std::invalid_argument("extrapolation needs matching samples");
    const Eigen::Index deg = std::min<Eigen::Index>(2, n - 1);
    Eigen::MatrixXd A(n, deg + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pw = 1.0;
        for (Eigen::Index j = 0; j <= deg; ++j, pw *= eps[i]) A(i, j) = pw;
        y(i) = mu[i];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    return c(0);
}

TransitionCurve transition_curve(std::span<const double> eps_grid, const MicroParams& base, double lo, double hi,
                                 double tol, int workers, const SimOptions& sim) {
    const std::vector<double> grid(eps_grid.begin(), eps_grid.end());
    const auto res = sweep::map<ThresholdResult>(grid.size(), workers, [&](std::size_t i) {
        MicroParams q = base;
        q.eps = grid[i];
        return mmo_to_spiking_threshold(q, lo, hi, tol, sim);
    });
    TransitionCurve c;
    c.points = res;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (res[i].ok())
            c.samples.push_back(*res[i].value);
        else
            c.errors.push_back("eps=" + std::to_string(grid[i]) + ": " + res[i].error);
    }
    auto sorted = c.samples;
    std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.eps > r.eps; });
    c.decreasing = sorted.size() >= 2;
    for (std::size_t i = 1; i < sorted.size(); ++i) c.decreasing = c.decreasing && sorted[i].mu_star < sorted[i - 1].mu_star;
    if (!sorted.empty()) {
        std::vector<double> e, m;
        for (const auto& s : sorted) e.push_back(s.eps), m.push_back(s.mu_star);
        c.mu_limit = extrapolate_to_zero(e, m);
    }
    return c;
}

std::vector<TransversalityPoint> transversality_scan(std::span<const double> mu_grid, double a, double b, double sigma0,
                                                     const ShootOptions& opt, int workers) {
    const std::vector<double> grid(mu_grid.begin(), mu_grid.end());
    const auto res = sweep::map<TransversalityPoint>(grid.size(), workers, [&](std::size_t i) {
        const MicroParams p{grid[i], a, b, 0.0, canonical::kD1};
        TransversalityPoint tp;
        tp.mu_bar = grid[i];
        ode::EventSpec null;
        null.g = [](std::span<const double> x) { return x[1] - x[0] * x[0]; };
        null.direction = ode::Direction::rising;
        null.terminal = true;
        const ode::EventSpec events[] = {null, ode::blowup_sentinel(opt.blowup)};
        ode::IntegratorConfig cfg = opt.config;
        cfg.record_samples = false;
        const Vec3 seed = canonical::asymptotic_seed_special(grid[i], a, b, sigma0);
        const auto tr = ode::integrate(canonical::micro_field(p), seed, 0.0, opt.t_max, cfg, events);
        if (tr.termination == ode::Termination::terminal_event && tr.events.back().index == 0) {
            const auto& ev = tr.events.back();
            tp.crossed = true;
            tp.t = ev.t;
            tp.x = {ev.x[0], ev.x[1], ev.x[2]};
            tp.witness = ev.x[0] - ev.x[2];
        } else if (tr.termination == ode::Termination::terminal_event) {
            tp.note = "no crossing before blow-up";
        } else {
            tp.note = "no crossing: " + std::string(ode::to_string(tr.termination));
        }
        return tp;
    });
    std::vector<TransversalityPoint> out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (res[i].ok()) {
            out.push_back(*res[i].value);
        } else {
            TransversalityPoint tp;
            tp.mu_bar = grid[i];
            tp.note = res[i].error;
            out.push_back(tp);
        }
    }
    return out;
}

LargeMuReport large_mu_no_mmo(const MicroParams& p, const SimOptions& sim) {
    LargeMuReport r;
    const auto tr = simulate_micro(p, canonical::kDefaultRho, sim);
    if (tr.termination != ode::Termination::reached_t1)
        throw std::runtime_error("microscope simulation stopped early: " + std::string(ode::to_string(tr.termination)));
    const auto opt = micro_signature_options(p);
    r.signature = classify_signature(tr, opt);
    double xmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tr.size(); ++i) xmax = std::max(xmax, tr.value(i, 0));
    r.passed_fold = xmax > opt.spike_threshold;
    r.no_mmo = r.passed_fold && r.signature.small == 0;
    return r;
}

}  // namespace canard::mmo
