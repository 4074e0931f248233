#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "symflow/rabinowitz.hpp"

using namespace symflow;
using namespace symflow::rabinowitz;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("a constant loop on the circle has zero action") {
    DiscreteLoop loop;
    loop.points.assign(64, Vec2(1.0, 0.0));
    loop.eta = 0.0;
    CHECK(action(loop, CircleModel{}) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("the unit circle traversed once carries action pi") {
    const CircleModel model;
    const auto loop = circle_loop(1, 256, 1.0, 0.0, kPi);
    CHECK(action(loop, model) == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("a radius-two circle carries the four-fold area term") {
    const CircleModel model;
    auto loop = circle_loop(1, 256, 2.0, 0.3, 0.0);
    // H is constant on that circle only up to the cutoff; eta = 0 kills it
    CHECK(action(loop, model) == doctest::Approx(4.0 * kPi).epsilon(1e-9));
}

TEST_CASE("action converges at high order on analytic loops") {
    const CircleModel model;
    auto ellipse = [&](int n) {
        DiscreteLoop loop;
        loop.points.resize(n);
        for (int i = 0; i < n; ++i) {
            const double t = 2 * kPi * i / n;
            loop.points[i] = Vec2(1.1 * std::cos(t), 0.7 * std::sin(t));
        }
        loop.eta = 0.0;
        return loop;
    };
    // the multiplier term vanishes, the loop integral is the enclosed area
    const double exact_area = kPi * 1.1 * 0.7;
    double err32 = 0, err64 = 0;
    {
        DiscreteLoop l = ellipse(32);
        err32 = std::abs(action(l, model) + l.eta - exact_area);
        l = ellipse(64);
        err64 = std::abs(action(l, model) + l.eta - exact_area);
    }
    // order >= 2 demanded, the stencil actually delivers ~6
    CHECK(err32 / std::max(err64, 1e-17) > 4.0);
}

TEST_CASE("gradient vanishes on critical orbits and closes the multiplier equation") {
    const CircleModel model;
    const int n = 256;
    // discrete critical multiplier for the 6th-order stencil
    const auto omega_eff = [&](int k) {
        const double th = 2 * kPi * k / n;
        return n * (1.5 * std::sin(th) - 0.3 * std::sin(2 * th) + std::sin(3 * th) / 30.0);
    };
    for (int k : {1, 2, -1}) {
        const auto loop = circle_loop(k, n, 1.0, 0.4, omega_eff(k) / 2.0);
        CHECK(gradient(loop, model).norm() < 1e-10);
        CHECK(std::abs(omega_eff(k) / 2.0 - kPi * k) < 1e-6);
    }
}

TEST_CASE("constant loop off the level set pushes the multiplier equation") {
    const CircleModel model;
    DiscreteLoop loop;
    loop.points.assign(64, Vec2(std::sqrt(2.0), 0.0));
    loop.eta = 0.7;
    const auto g = gradient(loop, model);
    CHECK(g.eta == doctest::Approx(-1.0).epsilon(1e-12));  // H = 1 there
}

TEST_CASE("unit-circle loop with mismatched multiplier: only the loop part reacts") {
    const CircleModel model;
    const auto loop = circle_loop(1, 128, 1.0, 0.0, 1.0);  // eta far from pi
    const auto g = gradient(loop, model);
    CHECK(std::abs(g.eta) < 1e-12);  // H vanishes on the circle
    CHECK(g.norm() > 1.0);
}

TEST_CASE("critical search lands on the primary orbit") {
    const CircleModel model;
    const auto start = perturbed_orbit(1, 256, 0.02, 42);
    const auto res = find_critical(start, model, 1e-9);
    CHECK(std::abs(res.loop.eta - kPi) < 1e-6);
    CHECK(std::abs(action(res.loop, model) - res.loop.eta) < 1e-8);
}

TEST_CASE("critical search from a constant point on the circle keeps eta near zero") {
    const CircleModel model;
    DiscreteLoop start;
    start.points.assign(64, Vec2(0.98, 0.05));
    start.eta = 0.05;
    const auto res = find_critical(start, model, 1e-9);
    CHECK(std::abs(res.loop.eta) < 1e-6);
    CHECK(std::abs(action(res.loop, model)) < 1e-6);
}

TEST_CASE("search far outside the cutoff region fails honestly") {
    const CircleModel model;
    DiscreteLoop start;
    start.points.assign(64, Vec2(3.0, 0.0));
    start.eta = 0.3;
    CHECK_THROWS_AS(find_critical(start, model, 1e-9, 60), SearchError);
}

TEST_CASE("shell estimate on the primary orbit and a perturbed suite") {
    const CircleModel model;
    const double delta = 0.2;
    const auto orbit = circle_loop(1, 256, 1.0, 0.0, kPi);
    const auto b = eta_bound_check(orbit, model, delta);
    CHECK(b.holds);
    CHECK(b.lhs == doctest::Approx(kPi));

    for (const auto& row : step1_suite(model, 50, 7, 256, delta)) CHECK(row.holds);
}

TEST_CASE("loops leaving the shell are routed to the other regime") {
    const CircleModel model;
    const auto outside = circle_loop(1, 64, std::sqrt(1.0 + 2 * 0.2), 0.0, 0.0);
    CHECK_THROWS_AS(eta_bound_check(outside, model, 0.2), PreconditionError);
    CHECK_THROWS_AS(eta_bound_check(circle_loop(1, 64), model, 0.3), PreconditionError);
}

TEST_CASE("gradient floor outside the half shell") {
    const CircleModel model;
    const double delta = 0.2;
    const auto outer = circle_loop(1, 128, std::sqrt(1.0 + delta), 0.0, 0.0);
    const auto g1 = grad_lower_bound(outer, model, delta);
    CHECK_FALSE(g1.crossing_diagnostic);
    CHECK(g1.holds);

    const auto inner = circle_loop(1, 128, std::sqrt(1.0 - delta), 0.0, 0.0);
    const auto g2 = grad_lower_bound(inner, model, delta);
    CHECK(g2.holds);

    for (const auto& row : step2_suite(model, 50, 11, 256, delta)) CHECK(row.holds);
}

TEST_CASE("straddling loops only get a diagnostic") {
    const CircleModel model;
    DiscreteLoop loop;
    const int n = 64;
    loop.points.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = 2 * kPi * i / n;
        const double r = 1.0 + 0.4 * std::cos(t);  // swings across the shell
        loop.points[i] = Vec2(r * std::cos(t), r * std::sin(t));
    }
    loop.eta = 0.0;
    const auto g = grad_lower_bound(loop, model, 0.2);
    CHECK(g.crossing_diagnostic);
    CHECK(g.transverse_estimate > 0.0);
}

TEST_CASE("flow-line and homotopy multiplier bounds") {
    CHECK(flowline_eta_bound(0.0, 3.5, 1.0, 2.0) == doctest::Approx(3.5));
    CHECK(flowline_eta_bound(4.0, 10.0, 2.0, 1.0) == doctest::Approx(11.0));
    CHECK(homotopy_eta_bound(1.0, 2.0, 1.0, 1.0, 0.5) == doctest::Approx((2.0 + 1.0) / 0.5));
    CHECK_THROWS_AS(homotopy_eta_bound(1.0, 2.0, 1.0, 1.0, 1.0), HypothesisError);
    CHECK(combined_c_m(5.0, 0.5, 1.2) == doctest::Approx(10.6));
}

TEST_CASE("parameter inequality: closed form and margins") {
    const auto r = nocrit_epsilon(1.0, 1.0);
    CHECK(r.eps == doctest::Approx(1.0 / 6.0));
    CHECK(r.margin == doctest::Approx(0.5));

    const auto tiny = nocrit_epsilon(10.0, 0.1);
    CHECK(tiny.eps == doctest::Approx(0.1 / 40.2));
    CHECK(tiny.margin > 0.0);

    const auto limit = nocrit_epsilon(1.0, 1e-9);
    CHECK(limit.margin > 0.0);
    CHECK(limit.eps < 1e-9);

    CHECK_THROWS_AS(nocrit_epsilon(-1.0, 1.0), ValidationError);
}

TEST_CASE("exact rational twin verifies both inequalities") {
    const auto e = nocrit_epsilon_exact(1, 1, 1, 1);
    CHECK(e.eps_num == 1);
    CHECK(e.eps_den == 6);
    CHECK(e.below_threshold);
    CHECK(e.margin_positive);
    for (long long c = 1; c <= 10; ++c)
        for (long long d = 1; d <= 5; ++d) {
            const auto r = nocrit_epsilon_exact(c, 3, d, 7);
            CHECK(r.below_threshold);
            CHECK(r.margin_positive);
        }
}

TEST_CASE("directional derivatives match the gradient pairing") {
    for (const auto& row : gradient_fd_suite(CircleModel{}, 25, 3, 256)) CHECK(row.ok);
}
