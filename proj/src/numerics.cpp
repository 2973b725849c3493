#include "canard/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace canard::num {

Matrix jacobian_fd(const ode::VectorField& field, std::span<const double> x, double rel_step) {
    const auto n = static_cast<Eigen::Index>(field.dimension);
    Matrix jac(n, n);
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end()), fp(n), fm(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = rel_step * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        field.rhs(xp, fp);
        field.rhs(xm, fm);
        for (Eigen::Index i = 0; i < n; ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

std::vector<Complex> eigenvalues(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration did not converge");
    std::vector<Complex> out(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(out.begin(), out.end(), [](Complex l, Complex r) {
        return l.real() != r.real() ? l.real() > r.real() : l.imag() > r.imag();
    });
    return out;
}

double max_oscillatory_real(std::span<const Complex> eig, double imag_tol) {
    double m = -std::numeric_limits<double>::infinity();
    for (auto z : eig)
        if (std::abs(z.imag()) > imag_tol) m = std::max(m, z.real());
    return m;
}

std::vector<Bracket> scan_brackets(const Scalar& f, double lo, double hi, int n_points) {
    std::vector<Bracket> out;
    double xp = lo, fp = f(lo);
    for (int i = 1; i < n_points; ++i) {
        const double x = lo + (hi - lo) * i / (n_points - 1);
        const double fx = f(x);
        if (std::isfinite(fp) && std::isfinite(fx) && ((fp < 0.0) != (fx < 0.0) || fx == 0.0)) out.push_back({xp, x});
        xp = x;
        fp = fx;
    }
    return out;
}

double solve_bracketed(const Scalar& f, double lo, double hi, double xtol, double ftol) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) throw std::runtime_error("root bracket has no sign change");
    for (int it = 0; it < 200 && std::abs(hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0 || std::abs(fm) < ftol) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        // Secant polish once the bracket is tight.
        if (std::abs(hi - lo) < 1e-6 * std::max(1.0, std::abs(lo))) {
            const double xs = lo - flo * (hi - lo) / (fhi - flo);
            if (xs > lo && xs < hi) {
                const double fs = f(xs);
                if (std::abs(fs) <= std::min(std::abs(flo), std::abs(fhi)) && (fs == 0.0 || std::abs(fs) < ftol))
                    return xs;
                if ((fs < 0.0) == (flo < 0.0)) {
                    lo = xs;
                    flo = fs;
                } else {
                    hi = xs;
                    fhi = fs;
                }
            }
        }
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

double derivative(const Scalar& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace canard::num
