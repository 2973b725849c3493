#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canard/numerics.hpp"
#include "canard/ode.hpp"

namespace canard::neuron {

/// Conductances in mS/cm^2, potentials in mV, time in ms, current in uA/cm^2.
struct FullParams {
    double C = 1.5;
    double g_Na = 52.0;
    double g_K = 11.0;
    double g_L = 0.1;
    double g_Nap = 0.21;
    double g_Ks = 2.0;
    double E_Na = 55.0;
    double E_K = -90.0;
    double E_L = -54.0;
    double tau_w = 90.0;
    double tau_p = 0.15;
    double I_app = 0.0;

    void validate() const;
};

struct Gates {
    double m_inf, h_inf, n_inf, p_inf, w_inf;
    double tau_m, tau_h, tau_n, tau_p;
};

[[nodiscard]] double alpha_m(double v);
[[nodiscard]] double beta_m(double v);
[[nodiscard]] double alpha_h(double v);
[[nodiscard]] double beta_h(double v);
[[nodiscard]] double alpha_n(double v);
[[nodiscard]] double beta_n(double v);
[[nodiscard]] double m_inf(double v);
[[nodiscard]] double h_inf(double v);
[[nodiscard]] double n_inf(double v);
[[nodiscard]] double p_inf(double v);
[[nodiscard]] double w_inf(double v);
[[nodiscard]] double tau_n(double v);

/// tau_p is not voltage dependent; it is taken from the parameter record.
[[nodiscard]] Gates gate_curves(double v, double tau_p = FullParams{}.tau_p);

struct FullState {
    double v, m, h, n, p, w;

    [[nodiscard]] std::array<double, 6> to_array() const { return {v, m, h, n, p, w}; }
    [[nodiscard]] static FullState from(std::span<const double> x) { return {x[0], x[1], x[2], x[3], x[4], x[5]}; }
};

struct ReducedState {
    double v, w, n;

    [[nodiscard]] std::array<double, 3> to_array() const { return {v, w, n}; }
    [[nodiscard]] static ReducedState from(std::span<const double> x) { return {x[0], x[1], x[2]}; }
};

/// Ionic currents in uA/cm^2, outward positive.
struct Currents {
    double na, k, leak, nap, ks;

    [[nodiscard]] double total() const { return na + k + leak + nap + ks; }
};

[[nodiscard]] Currents currents(const FullState& s, const FullParams& p);
[[nodiscard]] Currents currents(const ReducedState& s, const FullParams& p);

[[nodiscard]] FullState full_rhs(const FullState& s, const FullParams& p);
[[nodiscard]] ReducedState reduced_rhs(const ReducedState& s, const FullParams& p);

enum class Variant { full, reduced3, modified3, full_no_na, full_no_k };

/// Accepts "full", "reduced3", "modified3", "full-noINa", "full-noIK".
/// @throws std::invalid_argument for unknown names
[[nodiscard]] Variant parse_variant(std::string_view name);
[[nodiscard]] std::string_view to_string(Variant v);
[[nodiscard]] std::size_t dimension(Variant v);
[[nodiscard]] bool is_reduced(Variant v);

/// Zeroes the conductance the variant removes (modified3: g_Nap).
[[nodiscard]] FullParams apply_variant(FullParams p, Variant v);

/// Field of the variant with apply_variant already applied.
[[nodiscard]] ode::VectorField make_field(Variant v, const FullParams& p);

/// Names of the state components, in field order.
[[nodiscard]] std::vector<std::string> state_names(Variant v);

/// Point with every gate at steady state and v at the lowest zero of the
/// steady-state current on [-100, 50].
[[nodiscard]] std::vector<double> rest_guess(Variant v, const FullParams& p);

enum class Stability { stable, unstable, marginal };

[[nodiscard]] std::string_view to_string(Stability s);

struct EquilibriumReport {
    std::vector<double> state;
    num::Matrix jacobian;
    std::vector<num::Complex> eigenvalues;
    Stability stability = Stability::marginal;
    double residual = 0.0;
    int iterations = 0;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 100;
    double fd_step = 1e-6;
};

/// Damped Newton on the field with a finite-difference Jacobian.
/// @throws std::runtime_error on divergence or a singular Jacobian
[[nodiscard]] EquilibriumReport find_equilibrium(const ode::VectorField& field, std::span<const double> guess,
                                                 const NewtonOptions& opt = {});

/// find_equilibrium seeded by rest_guess.
[[nodiscard]] EquilibriumReport equilibrium(Variant v, const FullParams& p);

struct HopfResult {
    double I_hopf = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double re_lo = 0.0;  ///< max oscillatory real part at bracket_lo
    double re_hi = 0.0;
    EquilibriumReport at_hopf;
};

/// Grid scan of the equilibrium branch over [I_lo, I_hi] followed by
/// bisection on the sign of the leading complex pair's real part.
/// @throws std::runtime_error when no crossing lies in range or continuation fails
[[nodiscard]] HopfResult hopf_scan(const FullParams& p, Variant v, double I_lo, double I_hi, int grid = 41,
                                   double tol = 1e-5);

enum class Criticality { subcritical, supercritical, inconclusive };

[[nodiscard]] std::string_view to_string(Criticality c);

struct CriticalityProbe {
    double delta = 0.05;          ///< offset below/above I_hopf
    double kick = 30.0;           ///< voltage kick of the bistability probe (mV)
    double t_probe = 2000.0;      ///< ms
    double onset_kick = 1.0;      ///< mV
    double t_onset = 40000.0;     ///< ms; onset runs must settle on slow growth rates
    double spike_threshold = -20.0;
    double min_exponent = 0.35;   ///< amplitude ~ delta^0.5 for a supercritical onset
};

struct CriticalityReport {
    Criticality kind = Criticality::inconclusive;
    bool bistable_below = false;
    int spikes_below = 0;
    double amp_near = 0.0;   ///< late-window amplitude at I_hopf + delta/4
    double amp_far = 0.0;    ///< late-window amplitude at I_hopf + delta
    double onset_exponent = 0.0;
    std::string note;
};

/// Probe 1: kicked trajectory at I_hopf - delta; sustained spikes mean a
/// coexisting large cycle. Probe 2: amplitude scaling above I_hopf.
[[nodiscard]] CriticalityReport classify_criticality(Variant v, const FullParams& p, double I_hopf,
                                                     const CriticalityProbe& probe = {});

}  // namespace canard::neuron
