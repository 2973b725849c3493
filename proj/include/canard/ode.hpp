#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace canard::ode {

using State = std::vector<double>;
using Rhs = std::function<void(std::span<const double> x, std::span<double> dx)>;

/// Autonomous vector field. Parameters are bound into the closure.
struct VectorField {
    std::size_t dimension = 0;
    Rhs rhs;

    [[nodiscard]] State operator()(std::span<const double> x) const;
};

/// Step-control settings for the 5(4) integrator.
struct IntegratorConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-3;
    double h_min = 1e-12;
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 10'000'000;
    bool record_samples = true;  ///< false keeps only the endpoints and events

    /// @throws std::invalid_argument on an inconsistent configuration
    void validate() const;
};

/// Crossing direction, measured along the direction of integration.
enum class Direction { rising, falling, any };

struct EventSpec {
    std::function<double(std::span<const double>)> g;
    Direction direction = Direction::any;
    bool terminal = false;
    double tolerance = 1e-10;
};

enum class Termination { reached_t1, terminal_event, step_floor, max_steps, non_finite };

[[nodiscard]] std::string_view to_string(Termination t);

struct EventHit {
    double t = 0.0;
    State x;
    std::size_t index = 0;
};

/// Time-ordered samples stored row-major, plus located events.
class Trajectory {
public:
    explicit Trajectory(std::size_t dimension = 0) : dim_(dimension) {}

    void push(double t, std::span<const double> x);

    [[nodiscard]] std::size_t dimension() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return times_.size(); }
    [[nodiscard]] bool empty() const { return times_.empty(); }
    [[nodiscard]] double time(std::size_t i) const { return times_[i]; }
    [[nodiscard]] std::span<const double> state(std::size_t i) const {
        return {states_.data() + i * dim_, dim_};
    }
    [[nodiscard]] double value(std::size_t i, std::size_t k) const { return states_[i * dim_ + k]; }
    [[nodiscard]] const std::vector<double>& times() const { return times_; }
    [[nodiscard]] State final_state() const;
    [[nodiscard]] double final_time() const { return times_.back(); }

    std::vector<EventHit> events;
    Termination termination = Termination::reached_t1;
    std::size_t steps = 0;
    std::size_t rejected = 0;

    /// True for reached_t1 and terminal_event.
    [[nodiscard]] bool completed() const;

private:
    std::size_t dim_;
    std::vector<double> times_;
    std::vector<double> states_;
};

/// Dormand-Prince 5(4) with PI step control. t1 < t0 integrates backward.
/// Failures are reported through Trajectory::termination with the partial
/// trajectory kept.
[[nodiscard]] Trajectory integrate(const VectorField& field, std::span<const double> state0, double t0,
                                   double t1, const IntegratorConfig& config = {},
                                   std::span<const EventSpec> events = {});

struct EventPoint {
    double t = 0.0;
    State x;
};

/// Refines a bracketed crossing of event.g by integrating from the lower end.
/// @throws std::runtime_error if the bracket has no crossing in the requested
///         direction or refinement does not converge
[[nodiscard]] EventPoint locate_event(const VectorField& field, double t_lo, std::span<const double> state_lo,
                                      double t_hi, std::span<const double> state_hi, const EventSpec& event,
                                      const IntegratorConfig& config = {1e-12, 1e-14});

/// Event on max-norm of the state, used to stop runaway trajectories.
[[nodiscard]] EventSpec blowup_sentinel(double bound = 1e6);

}  // namespace canard::ode
