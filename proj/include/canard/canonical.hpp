#pragma once

#include <array>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "canard/numerics.hpp"
#include "canard/ode.hpp"

namespace canard::canonical {

using Vec3 = std::array<double, 3>;

inline constexpr double kD1 = -0.4;

/// Values extracted from the modified model at I_app = 17.1.
namespace reference {
inline constexpr double eps = 0.2764436178;
inline constexpr double mu = 0.02839202004;
inline constexpr double a = 0.4266759683;
inline constexpr double b = -0.9420074624;
}  // namespace reference

/// Fast-time chart parameters: x' = -y + x^2 + D1 x^3, y' = eps^2 (x - z), z' = eps (mu + a x + b z).
struct CanonicalParams {
    double eps = reference::eps;
    double mu = reference::mu;
    double a = reference::a;
    double b = reference::b;
    double D1 = kD1;

    /// @throws std::invalid_argument unless eps > 0 and -b > a > 0
    void validate() const;
};

/// Microscope chart parameters; eps = 0 selects the singular system.
struct MicroParams {
    double mu_bar = 0.0;
    double a = reference::a;
    double b = reference::b;
    double eps = reference::eps;
    double D1 = kD1;

    void validate() const;
};

[[nodiscard]] Vec3 canon_rhs(const Vec3& s, const CanonicalParams& p);
/// canon_rhs / eps^2 (slow time).
[[nodiscard]] Vec3 slow_rhs(const Vec3& s, const CanonicalParams& p);
[[nodiscard]] Vec3 micro_rhs(const Vec3& s, const MicroParams& p);

enum class SigmaChart { rescc, resccr, extended };

[[nodiscard]] SigmaChart parse_sigma_chart(std::string_view name);

/// State (x~, sigma, z~) or (x~, sigma, z~, omega) for the extended chart,
/// where omega = eps / sigma.
/// @throws std::domain_error if sigma <= 0 in the rescc chart
void sigma_rhs(std::span<const double> s, const MicroParams& p, SigmaChart chart, std::span<double> ds);

[[nodiscard]] ode::VectorField canon_field(const CanonicalParams& p);
[[nodiscard]] ode::VectorField slow_field(const CanonicalParams& p);
[[nodiscard]] ode::VectorField micro_field(const MicroParams& p);
[[nodiscard]] ode::VectorField sigma_field(const MicroParams& p, SigmaChart chart);

/// x = eps xb, y = eps^2 yb, z = eps zb.
[[nodiscard]] Vec3 micro_to_canon(const Vec3& m, double eps);
[[nodiscard]] Vec3 canon_to_micro(const Vec3& c, double eps);
/// sigma = 1/sqrt(yb), x~ = sigma xb, z~ = sigma zb; requires yb > 0.
[[nodiscard]] Vec3 micro_to_sigma(const Vec3& m);
[[nodiscard]] Vec3 sigma_to_micro(const Vec3& s);

/// Unique equilibrium of the microscope system at eps = 0.
[[nodiscard]] Vec3 micro_equilibrium(double mu_bar, double a, double b);
/// Linearization A0 at that equilibrium.
[[nodiscard]] num::Matrix micro_linearization(double mu_bar, double a, double b);
/// C(mu_bar) = (a+b) a + (2b^2 + 2) mu_bar - 4b/(a+b) mu_bar^2.
[[nodiscard]] double hopf_polynomial(double mu_bar, double a, double b);

struct HopfRoots {
    double mu1;
    double mu2;
};

/// Roots of C(mu_bar), ascending.
/// @throws std::domain_error on a negative discriminant
[[nodiscard]] HopfRoots hopf_roots(double a, double b);

[[nodiscard]] double gamma_alpha(double a, double b);
[[nodiscard]] double mu_bar_0(double a, double b);
[[nodiscard]] Vec3 gamma_poly(double t, double x0, double a, double b);
[[nodiscard]] Vec3 gamma_poly_dot(double t, double x0, double a, double b);

/// S1D in canonical coordinates: (y, z) at x.
[[nodiscard]] std::pair<double, double> s1d_curve(double x, double mu, double a, double b, double D1 = kD1);
/// Leading eigenvalues of the canonical linearization along S1D.
[[nodiscard]] std::pair<double, double> s1d_eigs_leading(double x, double eps, double D1, double b);
[[nodiscard]] num::Matrix canon_jacobian(const Vec3& s, const CanonicalParams& p);

/// Canonical S1D point at x = -rho mapped to the microscope chart (eps > 0).
[[nodiscard]] Vec3 s1d_seed_micro(double rho, const MicroParams& p);
/// Default rho: puts the seed at xb = -2 when eps = reference::eps.
inline constexpr double kDefaultRho = 2.0 * reference::eps;

/// Leading-order point of the algebraic special solution at sigma0.
[[nodiscard]] Vec3 asymptotic_seed_special(double mu_bar, double a, double b, double sigma0 = 1e-2);

}  // namespace canard::canonical
