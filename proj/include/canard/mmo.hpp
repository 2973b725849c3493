#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canard/canonical.hpp"
#include "canard/neuron.hpp"
#include "canard/ode.hpp"
#include "canard/sweep.hpp"

namespace canard::mmo {

using canonical::MicroParams;
using canonical::Vec3;

// ---------------------------------------------------------------- signatures

enum class Regime { steady, sto_only, mmo, spiking };

[[nodiscard]] std::string_view to_string(Regime r);

struct Extremum {
    double t;
    double value;
    bool is_max;
};

/// Local extrema of component var for t >= t_from, refined by a parabola
/// through neighbouring samples. Extrema whose height over the adjacent
/// opposite extrema is below min_prominence are dropped.
[[nodiscard]] std::vector<Extremum> find_extrema(const ode::Trajectory& tr, std::size_t var, double t_from,
                                                 double min_prominence);

struct Block {
    int L = 0;
    int s = 0;
    bool operator==(const Block&) const = default;
};

struct MMOSignature {
    std::vector<Block> blocks;
    Regime regime = Regime::steady;
    bool periodic = false;
    int period = 0;  ///< in blocks
    int spikes = 0;
    int small = 0;
    int unclassified = 0;  ///< maxima between the STO band and the spike threshold

    /// Compact pattern of one period, e.g. "1^7" or "1^1 2^1".
    [[nodiscard]] std::string pattern() const;
};

struct SignatureOptions {
    std::size_t var = 0;
    double spike_threshold = -20.0;
    double sto_low = -std::numeric_limits<double>::infinity();
    double sto_high = -20.0;
    double transient_fraction = 0.2;
    double min_prominence = 1e-3;
};

/// Defaults for the neuron models: v in mV, spikes cross -20 mV.
[[nodiscard]] SignatureOptions neuron_signature_options();
/// Defaults for the microscope chart: spikes pass the right fold of the
/// cubic, small oscillations stay within |xb| <= 3.
[[nodiscard]] SignatureOptions micro_signature_options(const MicroParams& p);

/// @throws std::invalid_argument for a trace too short to classify
[[nodiscard]] MMOSignature classify_signature(const ode::Trajectory& tr, const SignatureOptions& opt);

/// Count of non-degenerate extrema of x during the first complete passage
/// through the cube [-delta, delta]^3. The trace is in canonical coordinates.
/// @throws std::runtime_error if the trace never enters the cube
[[nodiscard]] int rotation_type(const ode::Trajectory& canonical_trace, double delta, double eps,
                                double degeneracy = 1e-8);

/// Maps a microscope trace to canonical coordinates.
[[nodiscard]] ode::Trajectory to_canonical(const ode::Trajectory& micro_trace, double eps);

// ------------------------------------------------------------ simulations

struct SimOptions {
    double t_max = 3000.0;
    ode::IntegratorConfig config{1e-9, 1e-11};
};

/// Neuron trace from the resting point shifted by v_offset.
[[nodiscard]] ode::Trajectory simulate_neuron(neuron::Variant v, const neuron::FullParams& p, double t_max,
                                              double v_offset = -5.0);
[[nodiscard]] MMOSignature neuron_signature(neuron::Variant v, const neuron::FullParams& p,
                                            double t_max = 3000.0);

/// Microscope trace from the S1D seed at rho.
[[nodiscard]] ode::Trajectory simulate_micro(const MicroParams& p, double rho = canonical::kDefaultRho,
                                             const SimOptions& opt = {});
[[nodiscard]] MMOSignature micro_signature(const MicroParams& p, double rho = canonical::kDefaultRho,
                                           const SimOptions& opt = {});

// --------------------------------------------------------------- shooting

struct ShootOptions {
    ode::IntegratorConfig config{1e-10, 1e-12};
    double t_max = 5000.0;
    double blowup = 1e6;
};

struct SectionPoint {
    double t = 0.0;
    Vec3 x{};
};

/// First rising crossing of xb = 0 from seed.
/// @throws std::runtime_error on blow-up or when no crossing occurs
[[nodiscard]] SectionPoint forward_to_section(const MicroParams& p, const Vec3& seed, const ShootOptions& opt = {});

/// Forward continuation of S1D from its point at x = -rho (eps > 0).
[[nodiscard]] SectionPoint continue_s1d_forward(const MicroParams& p, double rho = canonical::kDefaultRho,
                                                const ShootOptions& opt = {});

/// Forward continuation of the special solution from its asymptotic seed.
[[nodiscard]] SectionPoint continue_special_forward(const MicroParams& p, double sigma0 = 1e-2,
                                                    const ShootOptions& opt = {});

/// Backward integration from (x_start, y_start, z0) to the first xb = 0.
[[nodiscard]] SectionPoint backward_to_section(const MicroParams& p, double z0, const ShootOptions& opt = {},
                                               double x_start = 5.0, double y_start = 10.0);

struct SlicePoint {
    double z0;
    SectionPoint section;
};

struct DroppedPoint {
    double z0;
    std::string reason;
};

struct RepellingSlice {
    std::vector<SlicePoint> points;  ///< ordered by yb at the section
    std::vector<DroppedPoint> dropped;
};

[[nodiscard]] RepellingSlice repelling_manifold_slice(const MicroParams& p, std::span<const double> z_grid,
                                                      const ShootOptions& opt = {}, int workers = 1);

/// Seed of the forward branch in a gap computation.
struct ForwardSeed {
    /// automatic: s1d for eps > 0, special for eps = 0.
    enum class Kind { automatic, s1d, special, explicit_point } kind = Kind::automatic;
    double rho = canonical::kDefaultRho;
    double sigma0 = 1e-2;
    Vec3 point{};
};

struct GapOptions {
    ForwardSeed seed;
    double z_lo = 1.0;   ///< coarse z0 window for the repelling slice
    double z_hi = 3.0;
    int z_points = 41;
    double y_tol = 1e-10;  ///< match of yb between the branches
    ShootOptions shoot;
    int workers = 1;
};

struct CanardGapReport {
    double mu_bar = 0.0;
    double eps = 0.0;
    SectionPoint forward_point;
    std::vector<SlicePoint> repelling_slice;  ///< ordered by yb
    std::vector<DroppedPoint> dropped;
    double z0_match = 0.0;  ///< start value of the matching repelling trajectory
    double gap = 0.0;       ///< zb(forward) - zb(repelling) at equal yb
};

/// @throws std::runtime_error when the forward yb is outside the slice
[[nodiscard]] CanardGapReport canard_gap(const MicroParams& p, const GapOptions& opt = {});

struct CanardResult {
    double mu_bar = 0.0;
    double lo = 0.0, hi = 0.0;        ///< final bracket
    double gap_lo = 0.0, gap_hi = 0.0;  ///< certificate: opposite signs
    int iterations = 0;
};

/// Bisection on the sign of the gap to |dmu| <= tol.
/// @throws std::runtime_error without a sign change in the bracket
[[nodiscard]] CanardResult find_canard_mu(const MicroParams& p, double lo, double hi, double tol = 1e-6,
                                          const GapOptions& opt = {});

// ------------------------------------------------------------ transition

struct ThresholdResult {
    double eps = 0.0;
    double mu_star = 0.0;
    double lo = 0.0, hi = 0.0;
    Regime regime_lo = Regime::steady;  ///< certificate at lo
    Regime regime_hi = Regime::steady;  ///< certificate at hi
    std::string pattern_lo;
    int iterations = 0;
};

/// Bisection between a non-spiking and a spiking attractor, seeded on S1D.
/// @throws std::runtime_error if both ends classify alike
[[nodiscard]] ThresholdResult mmo_to_spiking_threshold(const MicroParams& p, double lo, double hi,
                                                       double tol = 1e-4, const SimOptions& sim = {});

struct TransitionCurve {
    std::vector<sweep::Outcome<ThresholdResult>> points;  ///< aligned with the eps grid
    std::vector<ThresholdResult> samples;                 ///< successful points, grid order
    std::vector<std::string> errors;
    double mu_limit = 0.0;  ///< polynomial extrapolation of mu*(eps) to eps = 0
    bool decreasing = false;
};

[[nodiscard]] TransitionCurve transition_curve(std::span<const double> eps_grid, const MicroParams& base,
                                               double lo, double hi, double tol = 1e-4, int workers = 1,
                                               const SimOptions& sim = {});

/// Least-squares polynomial in eps evaluated at 0 (degree min(2, n-1)).
[[nodiscard]] double extrapolate_to_zero(std::span<const double> eps, std::span<const double> mu);

struct TransversalityPoint {
    double mu_bar = 0.0;
    bool crossed = false;
    double t = 0.0;
    Vec3 x{};
    double witness = 0.0;  ///< xb - zb at the crossing
    std::string note;
};

/// eps = 0: first rising crossing of yb - xb^2 = 0 along the special solution.
[[nodiscard]] std::vector<TransversalityPoint> transversality_scan(std::span<const double> mu_grid, double a,
                                                                   double b, double sigma0 = 1e-2,
                                                                   const ShootOptions& opt = {}, int workers = 1);

struct LargeMuReport {
    bool no_mmo = false;
    bool passed_fold = false;  ///< the trace jumped past the right fold at least once
    MMOSignature signature;
};

/// True when the trajectory from S1D jumps past the right fold and its
/// post-transient part has no subthreshold extrema.
[[nodiscard]] LargeMuReport large_mu_no_mmo(const MicroParams& p, const SimOptions& sim = {});

}  // namespace canard::mmo
