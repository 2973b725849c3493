#include "canard/canonical.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace canard::canonical {

namespace {

void check_ab(double a, double b) {
    if (!(-b > a && a > 0.0)) throw std::invalid_argument("parameters must satisfy -b > a > 0");
}

}  // namespace

void CanonicalParams::validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    check_ab(a, b);
    if (!std::isfinite(mu) || !std::isfinite(D1)) throw std::invalid_argument("mu and D1 must be finite");
}

void MicroParams::validate() const {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be non-negative");
    check_ab(a, b);
    if (!std::isfinite(mu_bar) || !std::isfinite(D1)) throw std::invalid_argument("mu_bar and D1 must be finite");
}

Vec3 canon_rhs(const Vec3& s, const CanonicalParams& p) {
    const auto [x, y, z] = s;
    return {-y + x * x + p.D1 * x * x * x, p.eps * p.eps * (x - z), p.eps * (p.mu + p.a * x + p.b * z)};
}

Vec3 slow_rhs(const Vec3& s, const CanonicalParams& p) {
    const Vec3 d = canon_rhs(s, p);
    const double k = 1.0 / (p.eps * p.eps);
    return {k * d[0], k * d[1], k * d[2]};
}

Vec3 micro_rhs(const Vec3& s, const MicroParams& p) {
    const auto [x, y, z] = s;
    return {-y + x * x + p.eps * p.D1 * x * x * x, x - z, p.mu_bar + p.a * x + p.b * z};
}

SigmaChart parse_sigma_chart(std::string_view name) {
    if (name == "rescc") return SigmaChart::rescc;
    if (name == "resccr") return SigmaChart::resccr;
    if (name == "extended") return SigmaChart::extended;
    throw std::invalid_argument("unknown sigma chart: " + std::string(name));
}

void sigma_rhs(std::span<const double> s, const MicroParams& p, SigmaChart chart, std::span<double> ds) {
    const double x = s[0], sg = s[1], z = s[2];
    const double diff = x - z;
    if (chart == SigmaChart::extended) {
        const double om = s[3];
        ds[0] = -0.5 * sg * sg * diff * x - 1.0 + x * x + p.D1 * om * x * x * x;
        ds[1] = -0.5 * sg * sg * sg * diff;
        ds[2] = sg * (sg * p.mu_bar + p.a * x + p.b * z - 0.5 * sg * diff * z);
        ds[3] = 0.5 * sg * sg * om * diff;
        return;
    }
    // resccr: rescc multiplied by sigma, so sigma = 0 is allowed.
    const double cubic = sg > 0.0 ? p.eps / sg * p.D1 * x * x * x : 0.0;
    double dx = -0.5 * sg * sg * diff * x - 1.0 + x * x + cubic;
    double dsg = -0.5 * sg * sg * sg * diff;
    double dz = sg * (sg * p.mu_bar + p.a * x + p.b * z - 0.5 * sg * diff * z);
    if (chart == SigmaChart::rescc) {
        if (!(sg > 0.0)) throw std::domain_error("rescc chart requires sigma > 0");
        dx /= sg;
        dsg /= sg;
        dz /= sg;
    }
    ds[0] = dx;
    ds[1] = dsg;
    ds[2] = dz;
}

ode::VectorField canon_field(const CanonicalParams& p) {
    return {3, [p](std::span<const double> x, std::span<double> dx) {
                const Vec3 d = canon_rhs({x[0], x[1], x[2]}, p);
                dx[0] = d[0], dx[1] = d[1], dx[2] = d[2];
            }};
}

ode::VectorField slow_field(const CanonicalParams& p) {
    p.validate();
    return {3, [p](std::span<const double> x, std::span<double> dx) {
                const Vec3 d = slow_rhs({x[0], x[1], x[2]}, p);
                dx[0] = d[0], dx[1] = d[1], dx[2] = d[2];
            }};
}

ode::VectorField micro_field(const MicroParams& p) {
    return {3, [p](std::span<const double> x, std::span<double> dx) {
                const Vec3 d = micro_rhs({x[0], x[1], x[2]}, p);
                dx[0] = d[0], dx[1] = d[1], dx[2] = d[2];
            }};
}

ode::VectorField sigma_field(const MicroParams& p, SigmaChart chart) {
    const std::size_t n = chart == SigmaChart::extended ? 4 : 3;
    return {n, [p, chart](std::span<const double> x, std::span<double> dx) { sigma_rhs(x, p, chart, dx); }};
}

Vec3 micro_to_canon(const Vec3& m, double eps) { return {eps * m[0], eps * eps * m[1], eps * m[2]}; }

Vec3 canon_to_micro(const Vec3& c, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("microscope map needs eps > 0");
    return {c[0] / eps, c[1] / (eps * eps), c[2] / eps};
}

Vec3 micro_to_sigma(const Vec3& m) {
    if (!(m[1] > 0.0)) throw std::domain_error("sigma chart needs yb > 0");
    const double sg = 1.0 / std::sqrt(m[1]);
    return {sg * m[0], sg, sg * m[2]};
}

Vec3 sigma_to_micro(const Vec3& s) {
    if (!(s[1] > 0.0)) throw std::domain_error("sigma must be positive");
    return {s[0] / s[1], 1.0 / (s[1] * s[1]), s[2] / s[1]};
}

Vec3 micro_equilibrium(double mu_bar, double a, double b) {
    const double x = -mu_bar / (a + b);
    return {x, x * x, x};
}

num::Matrix micro_linearization(double mu_bar, double a, double b) {
    num::Matrix m(3, 3);
    m << -2.0 * mu_bar / (a + b), -1.0, 0.0, 1.0, 0.0, -1.0, a, 0.0, b;
    return m;
}

double hopf_polynomial(double mu_bar, double a, double b) {
    return (a + b) * a + (2.0 * b * b + 2.0) * mu_bar - 4.0 * b / (a + b) * mu_bar * mu_bar;
}

HopfRoots hopf_roots(double a, double b) {
    if (b == 0.0 || a + b == 0.0) throw std::domain_error("hopf_roots needs b != 0 and a + b != 0");
    const double q = 1.0 + b * b;
    const double disc = q * q + 4.0 * a * b;
    if (disc < 0.0) throw std::domain_error("negative discriminant in hopf_roots");
    const double r = std::sqrt(disc);
    const double k = (a + b) / (4.0 * b);
    double r1 = (q - r) * k, r2 = (q + r) * k;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

double gamma_alpha(double a, double b) { return (a + b) / (2.0 * b); }

double mu_bar_0(double a, double b) {
    if (b == 0.0) throw std::domain_error("mu_bar_0 needs b != 0");
    return -a * (a + b) / (2.0 * b * b);
}

Vec3 gamma_poly(double t, double x0, double a, double b) {
    const double al = gamma_alpha(a, b);
    const double x = x0 + al * t;
    return {x, x * x - al, (1.0 - 2.0 * al) * x};
}

Vec3 gamma_poly_dot(double t, double x0, double a, double b) {
    const double al = gamma_alpha(a, b);
    const double x = x0 + al * t;
    return {al, 2.0 * al * x, (1.0 - 2.0 * al) * al};
}

std::pair<double, double> s1d_curve(double x, double mu, double a, double b, double D1) {
    if (b == 0.0) throw std::domain_error("s1d_curve needs b != 0");
    return {x * x + D1 * x * x * x, -(mu + a * x) / b};
}

std::pair<double, double> s1d_eigs_leading(double x, double eps, double D1, double b) {
    return {(2.0 * x + 3.0 * D1 * x * x) / (eps * eps), b / eps};
}

num::Matrix canon_jacobian(const Vec3& s, const CanonicalParams& p) {
    num::Matrix m(3, 3);
    const double x = s[0], e2 = p.eps * p.eps;
    m << 2.0 * x + 3.0 * p.D1 * x * x, -1.0, 0.0, e2, 0.0, -e2, p.eps * p.a, 0.0, p.eps * p.b;
    return m;
}

Vec3 s1d_seed_micro(double rho, const MicroParams& p) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    const double x = -rho;
    const auto [y, z] = s1d_curve(x, p.eps * p.mu_bar, p.a, p.b, p.D1);
    return canon_to_micro({x, y, z}, p.eps);
}

Vec3 asymptotic_seed_special(double mu_bar, double a, double b, double sigma0) {
    (void)mu_bar;  // the leading-order point does not depend on mu_bar
    if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
    return {-1.0 / sigma0, 1.0 / (sigma0 * sigma0), (a / b) / sigma0};
}

}  // namespace canard::canonical
