#pragma once

#include <array>
#include <vector>

#include "canard/canonical.hpp"
#include "canard/neuron.hpp"

namespace canard::reduction {

using neuron::FullParams;

/// Undivided current balance F = C dv/dt of the 3-D reduced system.
[[nodiscard]] double current_balance(double v, double w, double n, const FullParams& p);
[[nodiscard]] double g1(double v, double w, double n, const FullParams& p);
[[nodiscard]] double g2(double v, double w, double n, const FullParams& p);

[[nodiscard]] double F_v(double v, double w, double n, const FullParams& p);
[[nodiscard]] double F_vv(double v, double w, double n, const FullParams& p);
[[nodiscard]] double F_w(double v, const FullParams& p);
[[nodiscard]] double F_n(double v, double n, const FullParams& p);

/// W(v, n) solving F(v, W, n) = 0.
/// @throws std::domain_error when g_Ks (v - E_K) vanishes
[[nodiscard]] double critical_w(double v, double n, const FullParams& p);

/// Root of v -> F_v(v, W(v, n0), n0) in [lo, hi].
/// @throws std::runtime_error if the window holds no root
[[nodiscard]] double fold_voltage(const FullParams& p, double lo = -65.0, double hi = -40.0, double n0 = 0.1);

struct Singularity {
    double n;
    std::array<double, 2> eig;  ///< real parts, ordered by magnitude (weak first)
    bool complex;
    [[nodiscard]] bool is_node() const { return !complex && eig[0] < 0.0 && eig[1] < 0.0; }
};

struct FoldData {
    double v_c = 0.0;
    double w_c = 0.0;
    double n_c = 0.0;
    double f_vv = 0.0;             ///< undivided F_vv at the folded node
    double f_w = 0.0;
    std::array<double, 2> eig_desing{};  ///< weak first
    double ratio = 0.0;            ///< lambda_weak / lambda_strong
    std::vector<Singularity> candidates;  ///< every folded singularity found on the fold
    FullParams params;

    /// n -> W(v_c, n)
    [[nodiscard]] double xi(double n) const { return critical_w(v_c, n, params); }
};

/// Desingularized reduced flow in (v, n) on the critical manifold, with the
/// g_Na-normalized balance f = F / g_Na.
[[nodiscard]] std::array<double, 2> desingularized_rhs(double v, double n, const FullParams& p);

/// Folded singularities along the fold; returns the folded node.
/// @throws std::runtime_error if no folded node is found (candidates in message)
[[nodiscard]] FoldData folded_singularity(const FullParams& p);

/// Shift, fold rectification and scaling that take the folded node to the
/// origin of (V, W, N).
struct TransformChain {
    double v_c = 0.0, w_c = 0.0, n_c = 0.0;
    double gamma1 = 0.0;  ///< F_vv / 2
    double gamma2 = 0.0;  ///< F_vv F_w / 2
    double g2_0 = 0.0;    ///< n-rate at the folded node after the shift
    double beta = 0.0, c = 0.0, d = 0.0, e = 0.0;
    double kappa = 0.0;       ///< C / g_Na
    double time_scale = 0.0;  ///< C; the chain is written for C dV/dt = V^2 + W
    FullParams params;

    /// chi(nb) = W(v_c, n_c + nb) - w_c
    [[nodiscard]] double chi(double nb) const;
    [[nodiscard]] double chi_prime(double nb) const;
    [[nodiscard]] std::array<double, 3> to_chain(const std::array<double, 3>& vwn) const;
    [[nodiscard]] std::array<double, 3> from_chain(const std::array<double, 3>& VWN) const;
    /// Transformed field: (C dV/dt, dW/dt, dN/dt).
    [[nodiscard]] std::array<double, 3> rhs(const std::array<double, 3>& VWN) const;
};

struct Extraction {
    canonical::CanonicalParams canonical;
    TransformChain chain;
    FoldData fold;
};

/// Folded node, transformation chain and canonical parameters.
/// @throws std::runtime_error if c <= 0 or -b > a > 0 fails (values in message)
[[nodiscard]] Extraction extract_canonical(const FullParams& p);

/// Modified-model parameters (g_Nap = 0) at the given drive.
[[nodiscard]] FullParams modified_params(double I_app);

}  // namespace canard::reduction
