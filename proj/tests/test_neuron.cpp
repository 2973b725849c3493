#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "canard/neuron.hpp"
#include "canard/numerics.hpp"
#include "canard/sweep.hpp"

using namespace canard;
using namespace canard::neuron;

namespace {

// Independent oracle: the printed rate functions evaluated directly.
namespace oracle {
double am(double v) { return -0.1 * (v + 23.0) / (std::exp(-0.1 * (v + 23.0)) - 1.0); }
double bm(double v) { return 4.0 * std::exp(-(v + 48.0) / 18.0); }
double an(double v) { return -0.01 * (v + 27.0) / (std::exp(-0.1 * (v + 27.0)) - 1.0); }
double bn(double v) { return 0.125 * std::exp(-(v + 37.0) / 80.0); }
double ah(double v) { return 0.07 * std::exp(-(v + 37.0) / 20.0); }
double bh(double v) { return 1.0 / (std::exp(-0.1 * (v + 7.0)) + 1.0); }
double pinf(double v) { return 1.0 / (1.0 + std::exp(-(v + 38.0) / 6.5)); }
double winf(double v) { return 1.0 / (1.0 + std::exp(-(v + 35.0) / 6.5)); }

/// C dv/dt by term-wise summation.
double cdv(const FullState& s, const FullParams& p) {
    const double ina = p.g_Na * s.m * s.m * s.m * s.h * (s.v - p.E_Na);
    const double ik = p.g_K * std::pow(s.n, 4) * (s.v - p.E_K);
    const double il = p.g_L * (s.v - p.E_L);
    const double inap = p.g_Nap * s.p * (s.v - p.E_Na);
    const double iks = p.g_Ks * s.w * (s.v - p.E_K);
    return p.I_app - ina - ik - il - inap - iks;
}
}  // namespace oracle

FullState steady(double v) {
    const auto g = gate_curves(v);
    return {v, g.m_inf, g.h_inf, g.n_inf, g.p_inf, g.w_inf};
}

}  // namespace

TEST_CASE("gate functions match the printed formulas") {
    for (double v = -100.0; v <= 50.0; v += 0.37) {
        CHECK(alpha_m(v) == doctest::Approx(oracle::am(v)).epsilon(1e-9));
        CHECK(beta_m(v) == doctest::Approx(oracle::bm(v)).epsilon(1e-14));
        CHECK(alpha_n(v) == doctest::Approx(oracle::an(v)).epsilon(1e-9));
        CHECK(beta_n(v) == doctest::Approx(oracle::bn(v)).epsilon(1e-14));
        CHECK(alpha_h(v) == doctest::Approx(oracle::ah(v)).epsilon(1e-14));
        CHECK(beta_h(v) == doctest::Approx(oracle::bh(v)).epsilon(1e-14));
        CHECK(m_inf(v) == doctest::Approx(oracle::am(v) / (oracle::am(v) + oracle::bm(v))).epsilon(1e-9));
        CHECK(n_inf(v) == doctest::Approx(oracle::an(v) / (oracle::an(v) + oracle::bn(v))).epsilon(1e-9));
        CHECK(h_inf(v) == doctest::Approx(oracle::ah(v) / (oracle::ah(v) + oracle::bh(v))).epsilon(1e-14));
        CHECK(p_inf(v) == doctest::Approx(oracle::pinf(v)).epsilon(1e-14));
        CHECK(w_inf(v) == doctest::Approx(oracle::winf(v)).epsilon(1e-14));
        CHECK(tau_n(v) == doctest::Approx(1.0 / (oracle::an(v) + oracle::bn(v))).epsilon(1e-9));
    }
}

TEST_CASE("removable singularities are finite and continuous") {
    // limits: alpha_m(-23) = 1, alpha_n(-27) = 0.1
    CHECK(alpha_m(-23.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(alpha_n(-27.0) == doctest::Approx(0.1).epsilon(1e-12));
    for (double d : {1e-9, 1e-6, 1e-4, 1e-3}) {
        // u / (1 - exp(-u)) = 1 + u/2 + u^2/12 + O(u^4)
        const double u = 0.1 * d;
        CHECK(std::abs(alpha_m(-23.0 + d) - (1.0 + u / 2 + u * u / 12)) < 1e-11);
        CHECK(std::abs(alpha_n(-27.0 - d) - 0.1 * (1.0 - u / 2 + u * u / 12)) < 1e-12);
    }
}

TEST_CASE("steady-state gates have zero derivatives") {
    FullParams p;
    for (double v : {-80.0, -60.0, -45.0, 0.0}) {
        const auto d = full_rhs(steady(v), p);
        CHECK(d.m == 0.0);
        CHECK(d.h == 0.0);
        CHECK(d.n == 0.0);
        CHECK(d.p == 0.0);
        CHECK(d.w == 0.0);
        const auto g = gate_curves(v);
        const auto r = reduced_rhs({v, g.w_inf, g.n_inf}, p);
        CHECK(r.w == 0.0);
        CHECK(r.n == 0.0);
    }
}

TEST_CASE("potassium currents vanish at E_K") {
    FullParams p;
    const auto c = currents(FullState{p.E_K, 0.3, 0.4, 0.7, 0.2, 0.9}, p);
    CHECK(c.k == 0.0);
    CHECK(c.ks == 0.0);
    CHECK(c.na != 0.0);
}

TEST_CASE("v' agrees with term-wise current summation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uv(-100.0, 50.0), ug(0.0, 1.0), ui(-5.0, 20.0);
    for (int k = 0; k < 2000; ++k) {
        FullParams p;
        p.I_app = ui(rng);
        const FullState s{uv(rng), ug(rng), ug(rng), ug(rng), ug(rng), ug(rng)};
        const double want = oracle::cdv(s, p) / p.C;
        CHECK(full_rhs(s, p).v == doctest::Approx(want).epsilon(1e-12).scale(1.0));
        const double total = currents(s, p).total();
        CHECK(p.C * full_rhs(s, p).v + total - p.I_app ==
              doctest::Approx(0.0).epsilon(1e-13).scale(1.0 + std::abs(total) + std::abs(p.I_app)));
        // reduced model: m, h, p at steady state
        const auto g = gate_curves(s.v);
        const FullState sr{s.v, g.m_inf, g.h_inf, s.n, g.p_inf, s.w};
        CHECK(reduced_rhs({s.v, s.w, s.n}, p).v == doctest::Approx(oracle::cdv(sr, p) / p.C).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("gating variables stay in [0, 1]") {
    constexpr int kStates = 10000;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uv(-100.0, 50.0), ug(0.0, 1.0);
    std::vector<std::array<double, 6>> init(kStates);
    for (auto& s : init) s = {uv(rng), ug(rng), ug(rng), ug(rng), ug(rng), ug(rng)};
    FullParams p;
    p.I_app = 1.0;
    const auto field = make_field(Variant::full, p);
    const auto res = sweep::map<double>(kStates, 8, [&](std::size_t i) {
        const auto tr = ode::integrate(field, init[i], 0.0, 500.0, {1e-6, 1e-9});
        if (!tr.completed()) throw std::runtime_error("integration failed");
        double worst = 0.0;
        for (std::size_t j = 0; j < tr.size(); ++j)
            for (std::size_t k = 1; k < 6; ++k)
                worst = std::max({worst, -tr.value(j, k), tr.value(j, k) - 1.0});
        return worst;
    });
    double worst = 0.0;
    int failures = 0;
    for (const auto& r : res) {
        if (!r.ok()) ++failures;
        else worst = std::max(worst, *r.value);
    }
    CHECK(failures == 0);
    CHECK(worst <= 1e-9);
}

TEST_CASE("time constants: bounds and ordering") {
    FullParams p;
    for (double v = -100.0; v <= 50.0; v += 0.25) {
        CHECK(tau_n(v) >= 1.0);
        CHECK(tau_n(v) <= 6.0);
    }
    for (double v = -70.0; v <= -50.0; v += 0.5) {
        const auto g = gate_curves(v);
        CHECK(p.tau_w > g.tau_n);
        CHECK(g.tau_h > g.tau_m);
        CHECK(g.tau_n > g.tau_m);
    }
}

TEST_CASE("variants") {
    CHECK(parse_variant("full-noINa") == Variant::full_no_na);
    CHECK(to_string(parse_variant("modified3")) == "modified3");
    CHECK_THROWS_AS((void)parse_variant("bogus"), std::invalid_argument);
    CHECK(dimension(Variant::full) == 6);
    CHECK(dimension(Variant::modified3) == 3);
    CHECK(apply_variant({}, Variant::modified3).g_Nap == 0.0);
    CHECK(apply_variant({}, Variant::full_no_na).g_Na == 0.0);
    CHECK(apply_variant({}, Variant::full_no_k).g_K == 0.0);
    CHECK(state_names(Variant::reduced3) == std::vector<std::string>{"v", "w", "n"});
    FullParams bad;
    bad.C = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("full equilibrium projects to a reduced equilibrium") {
    FullParams p;
    p.I_app = 1.0;
    const auto full = equilibrium(Variant::full, p);
    CHECK(full.residual <= 1e-10);
    const auto s = FullState::from(full.state);
    const auto r = reduced_rhs({s.v, s.w, s.n}, p);
    CHECK(std::max({std::abs(r.v), std::abs(r.w), std::abs(r.n)}) < 1e-6);
}

TEST_CASE("modified model at 17.1: saddle-focus with large negative eigenvalue") {
    FullParams p;
    p.I_app = 17.1;
    const auto eq = equilibrium(Variant::modified3, p);
    REQUIRE(eq.eigenvalues.size() == 3);
    int complex_pairs = 0;
    double re_pair = 0.0, real_eig = 0.0;
    for (const auto& e : eq.eigenvalues) {
        if (std::abs(e.imag()) > 1e-9) ++complex_pairs, re_pair = e.real();
        else real_eig = e.real();
    }
    CHECK(complex_pairs == 2);
    CHECK(re_pair > 0.0);
    CHECK(real_eig < 0.0);
    CHECK(real_eig / re_pair == doctest::Approx(-30.0).epsilon(0.2));
    CHECK(eq.stability == Stability::unstable);
}

TEST_CASE("full model at 0.5 is a stable rest state") {
    FullParams p;
    p.I_app = 0.5;
    const auto eq = equilibrium(Variant::full, p);
    for (const auto& e : eq.eigenvalues) CHECK(e.real() < 0.0);
    CHECK(eq.stability == Stability::stable);
}

TEST_CASE("linear field: eigenvalues match the characteristic roots") {
    // block diagonal with known spectrum {-1 +- 2i, 0.5, -3}, then a similarity
    num::Matrix d = num::Matrix::Zero(4, 4);
    d << -1, 2, 0, 0, -2, -1, 0, 0, 0, 0, 0.5, 0, 0, 0, 0, -3;
    num::Matrix s(4, 4);
    s << 1, 0.2, 0, 0.1, 0.3, 1, 0.1, 0, 0, 0.4, 1, 0.2, 0.1, 0, 0.3, 1;
    const num::Matrix a = s * d * s.inverse();
    const ode::VectorField lin{4, [a](std::span<const double> x, std::span<double> dx) {
                                   Eigen::Map<const Eigen::VectorXd> xv(x.data(), 4);
                                   Eigen::Map<Eigen::VectorXd>(dx.data(), 4) = a * xv;
                               }};
    const double guess[] = {0.3, -0.2, 0.1, 0.5};
    const auto eq = find_equilibrium(lin, guess);
    for (double xi : eq.state) CHECK(std::abs(xi) < 1e-10);
    const std::vector<num::Complex> want = {{0.5, 0.0}, {-1.0, 2.0}, {-1.0, -2.0}, {-3.0, 0.0}};
    REQUIRE(eq.eigenvalues.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(eq.eigenvalues[i] - want[i]) < 1e-8);
}

TEST_CASE("finite-difference Jacobian error is O(step^2)") {
    const ode::VectorField f{3, [](std::span<const double> x, std::span<double> dx) {
                                 dx[0] = std::sin(x[0] * x[1]);
                                 dx[1] = std::exp(x[1]) - x[2] * x[2];
                                 dx[2] = x[0] * x[0] * x[0] + x[1] * x[2];
                             }};
    const double x[] = {0.7, -0.4, 1.3};
    num::Matrix exact(3, 3);
    const double c = std::cos(x[0] * x[1]);
    exact << c * x[1], c * x[0], 0, 0, std::exp(x[1]), -2 * x[2], 3 * x[0] * x[0], x[2], x[1];
    const double e1 = (num::jacobian_fd(f, x, 1e-2) - exact).norm();
    const double e2 = (num::jacobian_fd(f, x, 5e-3) - exact).norm();
    const double e3 = (num::jacobian_fd(f, x, 2.5e-3) - exact).norm();
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.05));

    // on the neuron field the differences between refinements shrink by ~4
    FullParams p;
    p.I_app = 17.1;
    const auto nf = make_field(Variant::modified3, p);
    const auto x0 = equilibrium(Variant::modified3, p).state;
    const num::Matrix j1 = num::jacobian_fd(nf, x0, 4e-3), j2 = num::jacobian_fd(nf, x0, 2e-3),
                      j3 = num::jacobian_fd(nf, x0, 1e-3);
    CHECK((j1 - j2).norm() / (j2 - j3).norm() == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("Hopf scan") {
    const auto h = hopf_scan({}, Variant::full, 0.5, 1.5);
    CHECK(h.I_hopf == doctest::Approx(0.994).epsilon(0.01));
    CHECK(h.bracket_hi - h.bracket_lo <= 1e-4);
    CHECK(h.re_lo * h.re_hi < 0.0);
    CHECK_THROWS_AS((void)hopf_scan({}, Variant::full, 0.0, 0.5), std::runtime_error);
    CHECK_THROWS_AS((void)hopf_scan({}, Variant::full, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("criticality probes") {
    const FullParams full;
    const auto hf = hopf_scan(full, Variant::full, 0.5, 1.5);
    const auto cf = classify_criticality(Variant::full, full, hf.I_hopf);
    CHECK(cf.kind == Criticality::subcritical);
    CHECK(cf.bistable_below);

    const auto pna = apply_variant({}, Variant::full_no_na);
    const auto hn = hopf_scan(pna, Variant::full_no_na, 1.2, 2.4);
    const auto cn = classify_criticality(Variant::full_no_na, pna, hn.I_hopf);
    CHECK(cn.kind == Criticality::supercritical);
    CHECK(cn.onset_exponent == doctest::Approx(0.5).epsilon(0.1));
}
