#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "canard/ode.hpp"

namespace canard::num {

using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using Scalar = std::function<double(double)>;

/// Central-difference Jacobian with step rel_step * max(1, |x_j|).
[[nodiscard]] Matrix jacobian_fd(const ode::VectorField& field, std::span<const double> x, double rel_step = 1e-6);

/// Eigenvalues ordered by decreasing real part, ties by decreasing imaginary part.
[[nodiscard]] std::vector<Complex> eigenvalues(const Matrix& a);

/// Largest real part over eigenvalues with |Im| > imag_tol; -inf if none.
[[nodiscard]] double max_oscillatory_real(std::span<const Complex> eig, double imag_tol = 1e-9);

struct Bracket {
    double lo;
    double hi;
};

/// Sign changes of f on a uniform grid of n_points over [lo, hi].
[[nodiscard]] std::vector<Bracket> scan_brackets(const Scalar& f, double lo, double hi, int n_points);

/// Bisection with a secant polish on a sign-changing bracket.
/// @throws std::runtime_error when f(lo) and f(hi) share a sign
[[nodiscard]] double solve_bracketed(const Scalar& f, double lo, double hi, double xtol = 1e-14,
                                     double ftol = 0.0);

/// Fourth-order central difference.
[[nodiscard]] double derivative(const Scalar& f, double x, double h);

}  // namespace canard::num
