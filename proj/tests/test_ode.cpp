#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "canard/ode.hpp"

using namespace canard::ode;

namespace {

/// x' = -y, y' = x; solution (cos t, sin t) from (1, 0).
VectorField rotation() {
    return {2, [](std::span<const double> x, std::span<double> dx) {
                dx[0] = -x[1];
                dx[1] = x[0];
            }};
}

VectorField decay(double k) {
    return {1, [k](std::span<const double> x, std::span<double> dx) { dx[0] = -k * x[0]; }};
}

/// Forces every step to length h: the tolerances never reject.
IntegratorConfig fixed_step(double h) {
    IntegratorConfig c;
    c.rtol = 1e3;
    c.atol = 1e3;
    c.h_init = h;
    c.h_max = h;
    return c;
}

}  // namespace

TEST_CASE("harmonic oscillator matches cos/sin") {
    const double x0[] = {1.0, 0.0};
    const auto tr = integrate(rotation(), x0, 0.0, 20.0, {1e-10, 1e-12});
    REQUIRE(tr.termination == Termination::reached_t1);
    CHECK(tr.final_time() == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(std::abs(tr.final_state()[0] - std::cos(20.0)) < 1e-8);
    CHECK(std::abs(tr.final_state()[1] - std::sin(20.0)) < 1e-8);
}

TEST_CASE("exponential decay within tolerance everywhere") {
    const double x0[] = {3.0};
    const auto tr = integrate(decay(2.0), x0, 0.0, 5.0, {1e-9, 1e-12});
    for (std::size_t i = 0; i < tr.size(); ++i)
        CHECK(std::abs(tr.value(i, 0) - 3.0 * std::exp(-2.0 * tr.time(i))) < 1e-8);
}

TEST_CASE("fixed-step global error converges at order >= 4") {
    const double x0[] = {1.0, 0.0};
    auto err = [&](double h) {
        const auto tr = integrate(rotation(), x0, 0.0, 2.0, fixed_step(h));
        return std::hypot(tr.final_state()[0] - std::cos(2.0), tr.final_state()[1] - std::sin(2.0));
    };
    const double e1 = err(0.1), e2 = err(0.05), e3 = err(0.025);
    CHECK(std::log2(e1 / e2) >= 4.0);
    CHECK(std::log2(e2 / e3) >= 4.0);
}

TEST_CASE("time reversal returns to the start") {
    const double x0[] = {0.3, -0.7};
    const auto fwd = integrate(rotation(), x0, 0.0, 7.0, {1e-11, 1e-13});
    const auto end = fwd.final_state();
    const auto back = integrate(rotation(), end, 7.0, 0.0, {1e-11, 1e-13});
    CHECK(back.final_time() == doctest::Approx(0.0));
    CHECK(std::abs(back.final_state()[0] - 0.3) < 1e-9);
    CHECK(std::abs(back.final_state()[1] + 0.7) < 1e-9);
    // backward samples run in decreasing time
    for (std::size_t i = 1; i < back.size(); ++i) CHECK(back.time(i) < back.time(i - 1));
}

TEST_CASE("events on the circle") {
    const double x0[] = {1.0, 0.0};
    EventSpec y_down;
    y_down.g = [](std::span<const double> x) { return x[1]; };
    y_down.direction = Direction::falling;
    EventSpec x_up;
    x_up.g = [](std::span<const double> x) { return x[0]; };
    x_up.direction = Direction::rising;
    x_up.terminal = true;
    const EventSpec ev[] = {y_down, x_up};
    const auto tr = integrate(rotation(), x0, 0.0, 10.0, {1e-10, 1e-12}, ev);
    REQUIRE(tr.termination == Termination::terminal_event);
    REQUIRE(tr.events.size() == 2);
    CHECK(tr.events[0].index == 0);
    CHECK(std::abs(tr.events[0].t - std::numbers::pi) < 1e-9);
    CHECK(tr.events[1].index == 1);
    CHECK(std::abs(tr.events[1].t - 1.5 * std::numbers::pi) < 1e-9);
    CHECK(tr.final_time() == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-12));
    CHECK(std::abs(tr.final_state()[0]) < 1e-9);
}

TEST_CASE("event direction follows the integration direction") {
    // backward from (1, 0): y = -sin s decreases along the run
    const double x0[] = {1.0, 0.0};
    EventSpec x_cross;
    x_cross.g = [](std::span<const double> x) { return x[1]; };
    x_cross.direction = Direction::rising;
    x_cross.terminal = true;
    const EventSpec ev[] = {x_cross};
    const auto tr = integrate(rotation(), x0, 0.0, -10.0, {1e-10, 1e-12}, ev);
    REQUIRE(tr.events.size() == 1);
    CHECK(std::abs(tr.events[0].t + std::numbers::pi) < 1e-9);
}

TEST_CASE("locate_event refines a bracket") {
    const auto f = rotation();
    const double lo[] = {std::cos(3.0), std::sin(3.0)};
    const double hi[] = {std::cos(3.3), std::sin(3.3)};
    EventSpec e;
    e.g = [](std::span<const double> x) { return x[1]; };
    const auto p = locate_event(f, 3.0, lo, 3.3, hi, e);
    CHECK(std::abs(p.t - std::numbers::pi) < 1e-10);
    CHECK(std::abs(p.x[1]) < 1e-10);

    e.direction = Direction::rising;
    CHECK_THROWS_AS((void)locate_event(f, 3.0, lo, 3.3, hi, e), std::runtime_error);
    const double hi2[] = {std::cos(3.1), std::sin(3.1)};
    e.direction = Direction::any;
    CHECK_THROWS_AS((void)locate_event(f, 3.0, lo, 3.1, hi2, e), std::runtime_error);
}

TEST_CASE("blow-up sentinel stops a finite-time singularity") {
    const VectorField quad{1, [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; }};
    const double x0[] = {1.0};
    const EventSpec ev[] = {blowup_sentinel(1e6)};
    const auto tr = integrate(quad, x0, 0.0, 2.0, {}, ev);
    CHECK(tr.termination == Termination::terminal_event);
    CHECK(tr.completed());
    // x = 1/(1 - t) reaches 1e6 at t = 1 - 1e-6
    CHECK(std::abs(tr.final_time() - (1.0 - 1e-6)) < 1e-9);
}

TEST_CASE("without a sentinel the blow-up is reported, partial trace kept") {
    const VectorField quad{1, [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; }};
    const double x0[] = {1.0};
    const auto tr = integrate(quad, x0, 0.0, 2.0);
    CHECK(tr.termination == Termination::step_floor);
    CHECK(tr.size() > 1);
    CHECK(std::abs(tr.final_time() - 1.0) < 1e-8);
}

TEST_CASE("record_samples false keeps the endpoints") {
    const double x0[] = {1.0, 0.0};
    IntegratorConfig c{1e-9, 1e-12};
    c.record_samples = false;
    const auto tr = integrate(rotation(), x0, 0.0, 3.0, c);
    CHECK(tr.size() == 2);
    CHECK(tr.steps > 2);
}

TEST_CASE("identical inputs give bitwise identical trajectories") {
    const double x0[] = {0.1, 0.9};
    const auto a = integrate(rotation(), x0, 0.0, 13.0, {1e-9, 1e-11});
    const auto b = integrate(rotation(), x0, 0.0, 13.0, {1e-9, 1e-11});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.time(i) == b.time(i));
        CHECK(a.value(i, 0) == b.value(i, 0));
    }
}

TEST_CASE("config and input validation") {
    CHECK_THROWS_AS((IntegratorConfig{0.0, 1e-10}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((IntegratorConfig{1e-8, -1.0}.validate()), std::invalid_argument);
    const double bad[] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS((void)integrate(rotation(), bad, 0.0, 1.0), std::invalid_argument);
    const double nan0[] = {std::nan(""), 0.0};
    CHECK_FALSE(integrate(rotation(), nan0, 0.0, 1.0).completed());
}
