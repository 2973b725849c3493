#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canard/canonical.hpp"
#include "canard/mmo.hpp"
#include "canard/neuron.hpp"
#include "canard/reduction.hpp"
#include "canard/sweep.hpp"

namespace canard::cli {

namespace {

using canonical::MicroParams;
using canonical::Vec3;

neuron::FullParams neuron_params(const ResolvedConfig& c) {
    neuron::FullParams p;
    p.I_app = c.number("Iapp");
    p.C = c.number("C");
    p.g_Na = c.number("gNa");
    p.g_K = c.number("gK");
    p.g_L = c.number("gL");
    p.g_Nap = c.number("gNap");
    p.g_Ks = c.number("gKs");
    p.E_Na = c.number("ENa");
    p.E_K = c.number("EK");
    p.E_L = c.number("EL");
    p.tau_w = c.number("tauw");
    p.tau_p = c.number("taup");
    p.validate();
    return p;
}

MicroParams micro_params(const ResolvedConfig& c) {
    MicroParams p{c.number("mu_bar"), c.number("a"), c.number("b"), c.number("eps"), c.number("D1")};
    p.validate();
    return p;
}

ode::IntegratorConfig integrator(const ResolvedConfig& c) {
    ode::IntegratorConfig cfg;
    cfg.rtol = c.number("rtol");
    cfg.atol = c.number("atol");
    cfg.validate();
    return cfg;
}

json vec_json(std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); }

json complex_json(const std::vector<num::Complex>& z) {
    json out = json::array();
    for (const auto& e : z) out.push_back({e.real(), e.imag()});
    return out;
}

ResultTable trajectory_table(const ode::Trajectory& tr, const std::vector<std::string>& names) {
    std::vector<std::string> cols{"t"};
    cols.insert(cols.end(), names.begin(), names.end());
    ResultTable t(cols);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        std::vector<Cell> row{tr.time(i)};
        for (std::size_t k = 0; k < names.size(); ++k) row.emplace_back(tr.value(i, k));
        t.add_row(std::move(row));
    }
    return t;
}

std::vector<Cell> signature_cells(const mmo::MMOSignature& s) {
    return {std::string(mmo::to_string(s.regime)), s.pattern(), static_cast<long long>(s.periodic),
            static_cast<long long>(s.period), static_cast<long long>(s.spikes), static_cast<long long>(s.small),
            static_cast<long long>(s.unclassified)};
}

const std::vector<std::string> kSignatureCols{"regime", "pattern", "periodic", "period",
                                              "spikes", "small",   "unclassified"};

// ------------------------------------------------------------- simulate

RunResult simulate(const ResolvedConfig& c) {
    RunResult r;
    ode::IntegratorConfig cfg = integrator(c);
    if (c.number("h_max") > 0.0) cfg.h_max = c.number("h_max");
    const double t_max = c.number("tmax");
    if (!(t_max > 0.0)) throw ConfigError("tmax must be positive");
    const std::string chart = c.string("chart");

    ode::VectorField field;
    std::vector<double> x0;
    std::vector<std::string> names;
    std::vector<ode::EventSpec> events;
    if (chart.empty()) {
        const auto v = neuron::parse_variant(c.string("model"));
        const auto p = neuron::apply_variant(neuron_params(c), v);
        try {
            x0 = neuron::equilibrium(v, p).state;
        } catch (const std::runtime_error&) {
            x0 = neuron::rest_guess(v, p);
        }
        x0[0] += c.number("v_offset");
        field = neuron::make_field(v, p);
        names = neuron::state_names(v);
    } else {
        const auto mp = micro_params(c);
        const std::string init = c.string("init");
        if (init != "s1d" && init != "point") throw ConfigError("init must be s1d or point");
        const bool s1d = init == "s1d";
        const Vec3 pt{c.number("x0"), c.number("y0"), c.number("z0")};
        if (chart == "canon" || chart == "slow") {
            const canonical::CanonicalParams cp{mp.eps, mp.eps * mp.mu_bar, mp.a, mp.b, mp.D1};
            cp.validate();
            if (s1d) {
                const double x = -c.number("rho");
                const auto [y, z] = canonical::s1d_curve(x, cp.mu, cp.a, cp.b, cp.D1);
                x0 = {x, y, z};
            } else {
                x0 = {pt.begin(), pt.end()};
            }
            field = chart == "canon" ? canonical::canon_field(cp) : canonical::slow_field(cp);
            events.push_back(ode::blowup_sentinel());
            names = {"x", "y", "z"};
        } else if (chart == "micro") {
            const Vec3 s = s1d ? canonical::s1d_seed_micro(c.number("rho"), mp) : pt;
            x0 = {s.begin(), s.end()};
            field = canonical::micro_field(mp);
            names = {"xb", "yb", "zb"};
            events.push_back(ode::blowup_sentinel());
        } else {
            const auto sc = canonical::parse_sigma_chart(chart == "sigma" ? "rescc" : chart);
            const Vec3 s = s1d ? canonical::micro_to_sigma(canonical::s1d_seed_micro(c.number("rho"), mp)) : pt;
            x0 = {s.begin(), s.end()};
            names = {"xt", "sigma", "zt"};
            if (sc == canonical::SigmaChart::extended) {
                x0.push_back(mp.eps / s[1]);
                names.push_back("omega");
            }
            field = canonical::sigma_field(mp, sc);
            // sigma grows without bound as yb -> 0, where the chart ends
            events.push_back(ode::blowup_sentinel(1e3));
        }
    }
    const auto tr = ode::integrate(field, x0, 0.0, t_max, cfg, events);
    r.tables.emplace_back("trajectory", trajectory_table(tr, names));
    r.summary = {{"termination", ode::to_string(tr.termination)},
                 {"final_time", tr.final_time()},
                 {"final_state", vec_json(tr.final_state())},
                 {"steps", tr.steps},
                 {"rejected", tr.rejected},
                 {"initial_state", x0}};
    if (!tr.completed()) r.failure = "integration stopped early: " + std::string(ode::to_string(tr.termination));
    return r;
}

// ------------------------------------------------------------- bifurcate

RunResult bifurcate(const ResolvedConfig& c, const RunContext& ctx) {
    RunResult r;
    const auto v = neuron::parse_variant(c.string("model"));
    const auto base = neuron::apply_variant(neuron_params(c), v);
    const double lo = c.number("Ilo"), hi = c.number("Ihi");
    const int grid = c.integer("grid");
    if (!(hi > lo) || grid < 2) throw ConfigError("need Ihi > Ilo and grid >= 2");

    struct Point {
        neuron::EquilibriumReport eq;
    };
    const auto pts = sweep::map<Point>(static_cast<std::size_t>(grid), ctx.workers, [&](std::size_t i) {
        auto p = base;
        p.I_app = lo + (hi - lo) * static_cast<double>(i) / (grid - 1);
        return Point{neuron::equilibrium(v, p)};
    });
    ResultTable t({"Iapp", "v", "stability", "lead_re", "osc_re", "residual", "error"});
    for (int i = 0; i < grid; ++i) {
        const double I = lo + (hi - lo) * i / (grid - 1);
        const auto& o = pts[i];
        if (o.ok()) {
            const auto& eq = o.value->eq;
            const double osc = num::max_oscillatory_real(eq.eigenvalues);
            t.add_row({I, eq.state[0], std::string(neuron::to_string(eq.stability)), eq.eigenvalues.front().real(),
                       std::isfinite(osc) ? Cell{osc} : Cell{std::string("")}, eq.residual, std::string("")});
        } else {
            ++r.failed_points;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            t.add_row({I, nan, std::string(""), nan, std::string(""), nan, o.error});
        }
    }
    r.tables.emplace_back("equilibria", std::move(t));

    json s;
    try {
        const auto h = neuron::hopf_scan(base, v, lo, hi, grid);
        s["hopf"] = {{"I_hopf", h.I_hopf},
                     {"bracket", {h.bracket_lo, h.bracket_hi}},
                     {"re_at_bracket", {h.re_lo, h.re_hi}},
                     {"state", h.at_hopf.state},
                     {"eigenvalues", complex_json(h.at_hopf.eigenvalues)}};
        if (c.boolean("criticality")) {
            const auto cr = neuron::classify_criticality(v, base, h.I_hopf);
            s["criticality"] = {{"kind", neuron::to_string(cr.kind)},  {"bistable_below", cr.bistable_below},
                                {"spikes_below", cr.spikes_below},     {"amp_near", cr.amp_near},
                                {"amp_far", cr.amp_far},               {"onset_exponent", cr.onset_exponent},
                                {"note", cr.note}};
        }
    } catch (const std::runtime_error& e) {
        s["hopf"] = nullptr;
        r.failure = e.what();
    }
    r.summary = s;
    return r;
}

// ---------------------------------------------------------------- reduce

RunResult reduce(const ResolvedConfig& c) {
    RunResult r;
    const auto v = neuron::parse_variant(c.string("model"));
    if (!neuron::is_reduced(v)) throw ConfigError("reduce needs a three-dimensional model");
    const auto p = neuron::apply_variant(neuron_params(c), v);
    const auto ex = reduction::extract_canonical(p);
    const auto& f = ex.fold;
    const auto& ch = ex.chain;
    const auto& cp = ex.canonical;
    json cand = json::array();
    for (const auto& s : f.candidates)
        cand.push_back({{"n", s.n}, {"eig", {s.eig[0], s.eig[1]}}, {"complex", s.complex}, {"node", s.is_node()}});
    r.summary = {
        {"fold",
         {{"v_c", f.v_c}, {"w_c", f.w_c}, {"n_c", f.n_c}, {"F_vv", f.f_vv}, {"F_w", f.f_w},
          {"eig_desing", {f.eig_desing[0], f.eig_desing[1]}}, {"ratio", f.ratio}, {"candidates", cand}}},
        {"chain",
         {{"beta", ch.beta}, {"c", ch.c}, {"d", ch.d}, {"e", ch.e}, {"g2_0", ch.g2_0}, {"gamma1", ch.gamma1},
          {"gamma2", ch.gamma2}, {"kappa", ch.kappa}, {"time_scale", ch.time_scale}}},
        {"canonical",
         {{"eps", cp.eps}, {"mu", cp.mu}, {"a", cp.a}, {"b", cp.b}, {"D1", cp.D1}, {"mu_bar", cp.mu / cp.eps}}}};
    ResultTable t({"quantity", "value"});
    for (const auto& [k, val] : r.summary["canonical"].items()) t.add_row({k, val.get<double>()});
    r.tables.emplace_back("canonical", std::move(t));
    return r;
}

// -------------------------------------------------------------- mmo-scan

RunResult mmo_scan(const ResolvedConfig& c, const RunContext& ctx) {
    RunResult r;
    const std::string chart = c.string("chart");
    const double t_max = c.number("tmax");
    std::vector<double> grid;
    std::string key;
    std::function<mmo::MMOSignature(std::size_t)> eval;
    if (chart.empty()) {
        const auto v = neuron::parse_variant(c.string("model"));
        const auto base = neuron::apply_variant(neuron_params(c), v);
        grid = c.list("Iapp_grid");
        key = "Iapp";
        eval = [=, &grid](std::size_t i) {
            auto p = base;
            p.I_app = grid[i];
            return mmo::neuron_signature(v, p, t_max);
        };
    } else if (chart == "micro") {
        const auto base = micro_params(c);
        grid = c.list("mu_grid");
        key = "mu_bar";
        const mmo::SimOptions sim{t_max, integrator(c)};
        const double rho = c.number("rho");
        eval = [=, &grid](std::size_t i) {
            auto p = base;
            p.mu_bar = grid[i];
            return mmo::micro_signature(p, rho, sim);
        };
    } else {
        throw ConfigError("mmo-scan chart must be empty or micro");
    }
    const auto res = sweep::map<mmo::MMOSignature>(grid.size(), ctx.workers, eval);
    std::vector<std::string> cols{key};
    cols.insert(cols.end(), kSignatureCols.begin(), kSignatureCols.end());
    cols.push_back("error");
    ResultTable t(cols);
    json counts = json::object();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> row{grid[i]};
        if (res[i].ok()) {
            const auto cells = signature_cells(*res[i].value);
            row.insert(row.end(), cells.begin(), cells.end());
            row.emplace_back(std::string(""));
            counts[std::string(mmo::to_string(res[i].value->regime))] =
                counts.value(std::string(mmo::to_string(res[i].value->regime)), 0) + 1;
        } else {
            ++r.failed_points;
            for (std::size_t k = 0; k < kSignatureCols.size(); ++k) row.emplace_back(std::string(""));
            row.emplace_back(res[i].error);
        }
        t.add_row(std::move(row));
    }
    r.tables.emplace_back("mmo_scan", std::move(t));
    r.summary = {{"points", grid.size()}, {"failed", r.failed_points}, {"regimes", counts}};
    return r;
}

// ---------------------------------------------------------------- canard

RunResult canard(const ResolvedConfig& c, const RunContext& ctx) {
    RunResult r;
    const auto p = micro_params(c);
    mmo::GapOptions g;
    g.seed.rho = c.number("rho");
    g.seed.sigma0 = c.number("sigma0");
    g.z_lo = c.number("z_lo");
    g.z_hi = c.number("z_hi");
    g.z_points = c.integer("z_points");
    g.shoot.config = integrator(c);
    g.workers = ctx.workers;
    const auto res = mmo::find_canard_mu(p, c.number("mu_lo"), c.number("mu_hi"), c.number("tol"), g);
    auto at = p;
    at.mu_bar = res.mu_bar;
    const auto gap = mmo::canard_gap(at, g);

    ResultTable slice({"z0", "t", "xb", "yb", "zb"});
    for (const auto& s : gap.repelling_slice)
        slice.add_row({s.z0, s.section.t, s.section.x[0], s.section.x[1], s.section.x[2]});
    r.tables.emplace_back("repelling_slice", std::move(slice));

    json dropped = json::array();
    for (const auto& d : gap.dropped) dropped.push_back({{"z0", d.z0}, {"reason", d.reason}});
    r.summary = {{"mu_bar", res.mu_bar},
                 {"bracket", {res.lo, res.hi}},
                 {"gap_at_bracket", {res.gap_lo, res.gap_hi}},
                 {"iterations", res.iterations},
                 {"forward_point", gap.forward_point.x},
                 {"z0_match", gap.z0_match},
                 {"gap", gap.gap},
                 {"dropped", dropped},
                 {"mu_bar_0", canonical::mu_bar_0(p.a, p.b)}};
    return r;
}

// ------------------------------------------------------ transition-curve

RunResult transition(const ResolvedConfig& c, const RunContext& ctx) {
    RunResult r;
    const auto eps = c.list("eps");
    MicroParams base{0.0, c.number("a"), c.number("b"), eps.front(), c.number("D1")};
    const mmo::SimOptions sim{c.number("tmax"), integrator(c)};
    const auto curve = mmo::transition_curve(eps, base, c.number("mu_lo"), c.number("mu_hi"), c.number("tol"),
                                             ctx.workers, sim);
    ResultTable t({"eps", "mu_star", "lo", "hi", "regime_lo", "regime_hi", "pattern_lo", "iterations", "error"});
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const auto& o = curve.points[i];
        if (o.ok()) {
            const auto& s = *o.value;
            t.add_row({eps[i], s.mu_star, s.lo, s.hi, std::string(mmo::to_string(s.regime_lo)),
                       std::string(mmo::to_string(s.regime_hi)), s.pattern_lo, static_cast<long long>(s.iterations),
                       std::string("")});
        } else {
            ++r.failed_points;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            t.add_row({eps[i], nan, nan, nan, std::string(""), std::string(""), std::string(""), 0LL, o.error});
        }
    }
    r.tables.emplace_back("transition_curve", std::move(t));
    r.summary = {{"mu_limit", curve.samples.empty() ? json(nullptr) : json(curve.mu_limit)},
                 {"decreasing", curve.decreasing},
                 {"mu_bar_0", canonical::mu_bar_0(base.a, base.b)},
                 {"errors", curve.errors}};
    return r;
}

// -------------------------------------------------------- transversality

RunResult transversality(const ResolvedConfig& c, const RunContext& ctx) {
    RunResult r;
    const auto grid = c.list("mu_grid");
    mmo::ShootOptions opt;
    opt.config = integrator(c);
    const auto pts =
        mmo::transversality_scan(grid, c.number("a"), c.number("b"), c.number("sigma0"), opt, ctx.workers);
    ResultTable t({"mu_bar", "crossed", "t", "xb", "yb", "zb", "witness", "note"});
    for (const auto& p : pts) {
        if (!p.crossed) ++r.failed_points;
        t.add_row({p.mu_bar, static_cast<long long>(p.crossed), p.t, p.x[0], p.x[1], p.x[2], p.witness, p.note});
    }
    r.tables.emplace_back("transversality", std::move(t));

    json roots = json::array();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto &l = pts[i - 1], &h = pts[i];
        if (l.crossed && h.crossed && (l.witness < 0.0) != (h.witness < 0.0))
            roots.push_back(l.mu_bar - l.witness * (h.mu_bar - l.mu_bar) / (h.witness - l.witness));
    }
    r.summary = {{"witness_zero", roots}, {"mu_bar_0", canonical::mu_bar_0(c.number("a"), c.number("b"))}};
    return r;
}

}  // namespace

RunResult run_command(const ResolvedConfig& cfg, const RunContext& ctx) {
    const auto& name = cfg.command();
    if (ctx.workers < 1) throw ConfigError("workers must be >= 1");
    if (name == "simulate") return simulate(cfg);
    if (name == "bifurcate") return bifurcate(cfg, ctx);
    if (name == "reduce") return reduce(cfg);
    if (name == "mmo-scan") return mmo_scan(cfg, ctx);
    if (name == "canard") return canard(cfg, ctx);
    if (name == "transition-curve") return transition(cfg, ctx);
    if (name == "transversality") return transversality(cfg, ctx);
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace canard::cli
