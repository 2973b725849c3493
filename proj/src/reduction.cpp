#include "canard/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace canard::reduction {

double current_balance(double v, double w, double n, const FullParams& p) {
    return p.I_app - neuron::currents(neuron::ReducedState{v, w, n}, p).total();
}

double g1(double v, double w, double, const FullParams& p) { return (neuron::w_inf(v) - w) / p.tau_w; }

double g2(double v, double, double n, const FullParams&) { return (neuron::n_inf(v) - n) / neuron::tau_n(v); }

double F_v(double v, double w, double n, const FullParams& p) {
    return num::derivative([&](double u) { return current_balance(u, w, n, p); }, v, 1e-3);
}

double F_vv(double v, double w, double n, const FullParams& p) {
    const double h = 1e-2;
    auto f = [&](double u) { return current_balance(u, w, n, p); };
    return (-f(v + 2 * h) + 16 * f(v + h) - 30 * f(v) + 16 * f(v - h) - f(v - 2 * h)) / (12 * h * h);
}

double F_w(double v, const FullParams& p) { return -p.g_Ks * (v - p.E_K); }

double F_n(double v, double n, const FullParams& p) { return -4.0 * p.g_K * n * n * n * (v - p.E_K); }

double critical_w(double v, double n, const FullParams& p) {
    const double den = p.g_Ks * (v - p.E_K);
    if (den == 0.0) throw std::domain_error("critical_w undefined where g_Ks (v - E_K) = 0");
    return current_balance(v, 0.0, n, p) / den;
}

double fold_voltage(const FullParams& p, double lo, double hi, double n0) {
    const num::Scalar phi = [&](double v) { return F_v(v, critical_w(v, n0, p), n0, p); };
    const auto br = num::scan_brackets(phi, lo, hi, 201);
    if (br.empty()) throw std::runtime_error("no fold voltage in search window");
    return num::solve_bracketed(phi, br.front().lo, br.front().hi, 1e-13);
}

std::array<double, 2> desingularized_rhs(double v, double n, const FullParams& p) {
    const double w = critical_w(v, n, p);
    const double s = p.g_Na > 0.0 ? 1.0 / p.g_Na : 1.0;
    const double gg1 = g1(v, w, n, p), gg2 = g2(v, w, n, p);
    return {s * (F_w(v, p) * gg1 + F_n(v, n, p) * gg2), -s * F_v(v, w, n, p) * gg2};
}

namespace {

// Richardson-extrapolated central difference of a scalar function.
template <class Fn>
double richardson(Fn&& f, double h) {
    const double d1 = (f(h) - f(-h)) / (2 * h);
    const double d2 = (f(h / 2) - f(-h / 2)) / h;
    return (4 * d2 - d1) / 3;
}

Singularity classify(double v_c, double n, const FullParams& p) {
    num::Matrix j(2, 2);
    for (int k = 0; k < 2; ++k) {
        j(k, 0) = richardson([&](double h) { return desingularized_rhs(v_c + h, n, p)[k]; }, 1e-3);
        j(k, 1) = richardson([&](double h) { return desingularized_rhs(v_c, n + h, p)[k]; }, 1e-4);
    }
    const auto ev = num::eigenvalues(j);
    Singularity s{n, {ev[0].real(), ev[1].real()}, std::abs(ev[0].imag()) > 0.0};
    if (std::abs(s.eig[0]) > std::abs(s.eig[1])) std::swap(s.eig[0], s.eig[1]);
    return s;
}

}  // namespace

FoldData folded_singularity(const FullParams& p) {
    FoldData fd;
    fd.params = p;
    fd.v_c = fold_voltage(p);
    const double v_c = fd.v_c;
    const num::Scalar S = [&](double n) {
        const double w = critical_w(v_c, n, p);
        return F_w(v_c, p) * g1(v_c, w, n, p) + F_n(v_c, n, p) * g2(v_c, w, n, p);
    };
    for (const auto& br : num::scan_brackets(S, 1e-3, 0.999, 201))
        fd.candidates.push_back(classify(v_c, num::solve_bracketed(S, br.lo, br.hi, 1e-15), p));
    if (fd.candidates.empty()) throw std::runtime_error("no folded singularity on the fold");
    const auto node = std::find_if(fd.candidates.begin(), fd.candidates.end(),
                                   [](const Singularity& s) { return s.is_node(); });
    if (node == fd.candidates.end()) {
        std::ostringstream os;
        os << "no folded node; singularities at n =";
        for (const auto& s : fd.candidates) os << ' ' << s.n << " (eig " << s.eig[0] << ", " << s.eig[1] << ')';
        throw std::runtime_error(os.str());
    }
    fd.n_c = node->n;
    fd.w_c = critical_w(v_c, fd.n_c, p);
    fd.eig_desing = node->eig;
    fd.ratio = node->eig[0] / node->eig[1];
    fd.f_vv = F_vv(v_c, fd.w_c, fd.n_c, p);
    fd.f_w = F_w(v_c, p);
    return fd;
}

double TransformChain::chi(double nb) const { return critical_w(v_c, n_c + nb, params) - w_c; }

double TransformChain::chi_prime(double nb) const {
    const double n = n_c + nb;
    return -4.0 * params.g_K * n * n * n / params.g_Ks;
}

std::array<double, 3> TransformChain::to_chain(const std::array<double, 3>& vwn) const {
    const double vb = vwn[0] - v_c, nb = vwn[2] - n_c;
    const double wbb = vwn[1] - w_c - chi(nb);
    return {gamma1 * vb, gamma2 * wbb, nb / g2_0};
}

std::array<double, 3> TransformChain::from_chain(const std::array<double, 3>& VWN) const {
    const double vb = VWN[0] / gamma1, wbb = VWN[1] / gamma2, nb = VWN[2] * g2_0;
    return {vb + v_c, wbb + chi(nb) + w_c, nb + n_c};
}

std::array<double, 3> TransformChain::rhs(const std::array<double, 3>& VWN) const {
    const auto [v, w, n] = from_chain(VWN);
    const double nb = n - n_c;
    const double r1 = g1(v, w, n, params), r2 = g2(v, w, n, params);
    return {gamma1 * current_balance(v, w, n, params), gamma2 * (r1 - chi_prime(nb) * r2), r2 / g2_0};
}

Extraction extract_canonical(const FullParams& p) {
    Extraction ex;
    ex.fold = folded_singularity(p);
    auto& ch = ex.chain;
    ch.params = p;
    ch.v_c = ex.fold.v_c;
    ch.w_c = ex.fold.w_c;
    ch.n_c = ex.fold.n_c;
    ch.gamma1 = 0.5 * ex.fold.f_vv;
    ch.gamma2 = 0.5 * ex.fold.f_vv * ex.fold.f_w;
    ch.g2_0 = g2(ch.v_c, ch.w_c, ch.n_c, p);
    ch.kappa = p.C / p.g_Na;
    ch.time_scale = p.C;
    if (ch.gamma1 == 0.0 || ch.gamma2 == 0.0 || ch.g2_0 == 0.0)
        throw std::runtime_error("degenerate fold: zero scaling in transformation chain");

    const double h = 1e-4;
    auto partial = [&](int comp, int coord) {
        return richardson(
            [&](double s) {
                std::array<double, 3> x{0.0, 0.0, 0.0};
                x[coord] = s;
                return ch.rhs(x)[comp];
            },
            h);
    };
    ch.beta = partial(1, 2);
    ch.c = -partial(1, 0);
    ch.d = partial(2, 2);
    ch.e = partial(2, 0);
    if (!(ch.c > 0.0)) {
        std::ostringstream os;
        os << "expansion coefficient c = " << ch.c << " is not positive";
        throw std::runtime_error(os.str());
    }

    const double K = ch.time_scale;
    auto& cp = ex.canonical;
    cp.eps = std::sqrt(K * ch.c);
    cp.mu = ch.beta * std::sqrt(K) * std::pow(ch.c, -1.5);
    cp.a = cp.mu * ch.e;
    cp.b = ch.d * std::sqrt(K) / std::sqrt(ch.c);
    cp.D1 = canonical::kD1;
    if (!(-cp.b > cp.a && cp.a > 0.0)) {
        std::ostringstream os;
        os << "extracted parameters violate -b > a > 0: a = " << cp.a << ", b = " << cp.b;
        throw std::runtime_error(os.str());
    }
    return ex;
}

FullParams modified_params(double I_app) {
    FullParams p;
    p.I_app = I_app;
    return neuron::apply_variant(p, neuron::Variant::modified3);
}

}  // namespace canard::reduction
