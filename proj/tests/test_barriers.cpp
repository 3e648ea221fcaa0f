#include <cmath>

#include "doctest.h"

#include "kslab/barriers.hpp"
#include "kslab/cutoff.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/ode.hpp"

using namespace kslab;

TEST_CASE("growth rate examples")
{
    CHECK(growth_rate(10, 0.3) == doctest::Approx(22.0).epsilon(1e-14));
    CHECK(growth_rate(3, 0.2) == doctest::Approx(3.2).epsilon(1e-14));
}

TEST_CASE("growth supersolution starts above w_star(1)")
{
    for (double c1 : {0.5, 2.0, 7.0}) {
        const auto g = growth_supersolution(10, 0.3, c1);
        CHECK(g.value(1.0, 0.0) == doctest::Approx(std::max(c1, 2.0)));
        CHECK(g.value(1.0, 0.0) >= w_star(10, 1.0));
    }
    CHECK_THROWS_AS(growth_supersolution(10, 0.8, 1.0), std::domain_error);
    CHECK_THROWS_AS(growth_supersolution(10, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(growth_supersolution(10, 0.3, 1.0).evaluate(0.5, 0.0), std::out_of_range);
}

TEST_CASE("growth supersolution residual is nonnegative in both forms")
{
    for (int n : {3, 5, 10, 14}) {
        const double alpha = 0.5 * (1.0 - 2.0 / n);
        const auto g = growth_supersolution(n, alpha, 3.0);
        const auto [s, t] = certification_grid(1.0, 1e3, 0.0, 5.0);
        const auto r0p = residual(g, EquationForm::form_0p, s, t);
        CHECK(r0p.min >= -1e-10 * std::max(1.0, r0p.max));
        CHECK(r0p.certified(1e-8));
        const auto r0w = residual(g, EquationForm::form_0w, s, t);
        CHECK(r0w.prescribed_sign == -r0p.prescribed_sign);
        CHECK(r0w.certified(1e-8));
    }
}

TEST_CASE("oscillation parameters for n = 5, omega = 0.3")
{
    const auto p = oscillation_params_with_omega(5, 0.01, 0.3);
    CHECK(p.mu == doctest::Approx(0.3));
    CHECK(p.c1 == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(p.c1 > 0.0);
    CHECK(p.s0 < p.s1);
    CHECK(p.s1 < p.s_star);
    CHECK(p.s_star < p.s2);
    CHECK(std::cos(p.omega * std::log(p.s_star)) == doctest::Approx(1.0));
    const double q = std::exp(M_PI / (2.0 * p.omega));
    CHECK(p.s_star / p.s1 == doctest::Approx(q).epsilon(1e-10));
    CHECK(p.s2 / p.s_star == doctest::Approx(q).epsilon(1e-10));
    CHECK(p.c2 == doctest::Approx(std::pow(p.s2, 0.4)));
    CHECK(p.c3 == doctest::Approx(5.0 * (p.mu + p.omega) * std::pow(p.s1, -p.mu)));
}

TEST_CASE("oscillation frequency bound and domain")
{
    const auto p9 = oscillation_params(9, 0.01, 0.999);
    CHECK(p9.omega * p9.omega < 7.0 / 324.0);
    for (int n = 3; n <= 9; ++n) {
        const auto p = oscillation_params(n, 0.01, 0.9);
        CHECK(p.omega * p.omega < (n - 2.0) * (10.0 - n) / (4.0 * n * n));
        CHECK(p.c1 > 0.0);
        CHECK(p.s1 > 0.01);
        // k0 is the smallest admissible one
        CHECK(std::exp((4.0 * (p.k0 - 1) - 1.0) * M_PI / (2.0 * p.omega)) <= 0.01);
    }
    CHECK_THROWS_AS(oscillation_params(10, 0.01, 0.5), std::domain_error);
    CHECK_THROWS_AS(oscillation_params(2, 0.01, 0.5), std::domain_error);
    CHECK_THROWS_AS(oscillation_params(5, 0.01, 1.0), std::invalid_argument);
    CHECK_THROWS(oscillation_params_with_omega(5, 0.01, 0.5));
}

TEST_CASE("logistic closed form")
{
    const double c1 = 1.5, c2 = 3.0, c3 = 2.0, y0 = 0.1;
    CHECK(bernoulli_y(c1, c2, c3, y0, 1.0) == doctest::Approx(y0).epsilon(1e-15));
    CHECK(bernoulli_y(c1, c2, c3, y0, 1e4) == doctest::Approx(c1 / c3).epsilon(1e-12));
    const ScalarRhs f = [&](double, double y) { return (c1 / c2) * y - (c3 / c2) * y * y; };
    for (double t : {2.0, 5.0, 10.0}) {
        const double ref = rk4_integrate(f, 1.0, y0, t, 1e-3);
        CHECK(std::abs(bernoulli_y(c1, c2, c3, y0, t) - ref) <= 1e-8 * ref);
    }
}

TEST_CASE("oscillating subsolution values")
{
    const auto p = oscillation_params(5, 0.01, 0.9);
    const double y0 = 0.25 * p.c1 / p.c3;
    const auto sub = oscillating_subsolution(p, y0);
    const double scale = std::pow(p.s2, p.mu) * p.c1 / p.c3;
    for (double t : {1.0, 3.0, 50.0}) {
        CHECK(std::abs(sub.value(p.s1, t)) <= 1e-12 * scale);
        CHECK(std::abs(sub.value(p.s2, t)) <= 1e-12 * scale);
        const double y = bernoulli_y(p.c1, p.c2, p.c3, y0, t);
        CHECK(sub.value(p.s_star, t) == doctest::Approx(y * std::pow(p.s_star, p.mu)).epsilon(1e-12));
    }
    // beyond the logistic half-time the value at s_star sits above the floor
    const double half = 1.0 + p.c2 / p.c1 * std::log(3.0);
    const double floor = p.c1 * std::pow(p.s_star, p.mu) / (2.0 * p.c3);
    for (double t = half; t < half + 100.0; t += 5.0) CHECK(sub.value(p.s_star, t) >= floor * (1.0 - 1e-12));
    CHECK(sub.value(p.s_star, 0.5 * (1.0 + half)) < floor);
    CHECK_THROWS_AS(sub.evaluate(p.s1 * 0.9, 2.0), std::out_of_range);
    CHECK_THROWS_AS(sub.evaluate(p.s_star, 0.5), std::out_of_range);
}

TEST_CASE("oscillating subsolution residual is nonpositive where the cosine is positive")
{
    for (int n : {3, 5, 9}) {
        const auto p = oscillation_params(n, 0.01, 0.9);
        const auto sub = oscillating_subsolution(p, 0.5 * p.c1 / p.c3);
        const auto [s, t] = certification_grid(p.s1, p.s2, 1.0, 1.0 + 20.0 * p.c2 / p.c1);
        const auto r = residual(sub, EquationForm::form_0p, s, t);
        CHECK(r.prescribed_sign == -1);
        CHECK(r.certified(1e-8));
        CHECK(residual_report_json(sub, r).find("oscillating_subsolution") != std::string::npos);
    }
}

TEST_CASE("mass barrier: b relaxes monotonically to 2B with slope at most 2")
{
    MassBarrierParams p;
    p.n = 5;
    p.B = 0.7;
    p.b0 = 0.05;
    p.s_star = 40.0;
    const double T = 30.0 / b_relaxation_rate(p);
    double prev = p.b0;
    for (int k = 1; k <= 60; ++k) {
        const double b = b_solve(p, k * T / 60.0);
        CHECK(b >= prev);
        CHECK(b < 2.0 * p.B);
        prev = b;
    }
    CHECK(prev == doctest::Approx(2.0 * p.B).epsilon(1e-9));
    for (double b = 1e-3; b < 2.0 * p.B; b += 0.01) CHECK(b_rhs(p, b) <= 2.0);
    p.b0 = 2.0 * p.B;
    CHECK_THROWS_AS(b_solve(p, 1.0), std::invalid_argument);
    p.b0 = 0.0;
    CHECK_THROWS_AS(b_solve(p, 1.0), std::invalid_argument);
}

TEST_CASE("mass barrier: vanishes at the origin and is a supersolution")
{
    MassBarrierParams p;
    p.n = 4;
    p.B = 1.0;
    p.b0 = 0.5;
    p.s_star = 100.0;
    p.t0 = 2.0;
    const double T = p.t0 + 20.0 / b_relaxation_rate(p);
    const auto bar = mass_barrier(p, T);
    for (double t : {p.t0, 0.5 * (p.t0 + T), T}) CHECK(bar.value(0.0, t) == 0.0);
    const auto [s, t] = certification_grid(1e-6 * p.s_star, p.s_star, p.t0, T);
    const auto r = residual(bar, EquationForm::form_0w, s, t);
    CHECK(r.prescribed_sign == 1);
    CHECK(r.min >= -1e-10 * std::max(1.0, r.max));
    CHECK(r.certified(1e-8));
}

TEST_CASE("absorbing constant")
{
    const auto a = absorbing_constant(3, 1.0, 10.0);
    CHECK(a.c1 == doctest::Approx(55606.0).epsilon(1e-12));
    CHECK(a.u_bound == doctest::Approx(3.0 * a.C));
    // max{2/B, 2} = 2 for B >= 1
    const auto a2 = absorbing_constant(3, 2.0, 10.0);
    CHECK(a2.C == doctest::Approx(std::sqrt(8.0 / 9.0 * std::max(a2.c1, a2.c2) * 2.0)));
    // small B: c1 ~ 64/B^3 dominates, C ~ B^{-2}
    const double B = 1e-4;
    const auto small = absorbing_constant(3, B, 10.0);
    CHECK(small.c1 * B * B * B == doctest::Approx(64.0).epsilon(0.01));
    const double slope = std::log(absorbing_constant(3, B / 2.0, 10.0).C / small.C) / std::log(0.5);
    CHECK(slope == doctest::Approx(-2.0).epsilon(0.01));
    CHECK(absorbing_constant(5, 1.0).C > 0.0);
    CHECK_THROWS_AS(absorbing_constant(10, 1.0), std::domain_error);
    CHECK_THROWS_AS(absorbing_constant(5, 0.0), std::domain_error);
}

TEST_CASE("simulated n = 5 run stays ordered with respect to both barriers")
{
    const int n = 5;
    const auto mesh = build_mesh(n, std::pow(60.0, n), 512, Grading::log);
    InitialDatumSpec spec;
    spec.n = n;
    SolverConfig cfg;
    cfg.output_count = 40;
    const auto tr = run(make_datum(mesh, spec), cfg, 40.0);
    REQUIRE(tr.status == "ok");
    const auto params = oscillation_params(n, 0.01, 0.9);
    const auto sub = check_subsolution_order(tr, params);
    CHECK(sub.params.c4 > 0.0);
    CHECK(sub.checked_points > 0);
    CHECK(sub.holds);
    const auto mb = check_mass_barrier_order(tr, sub, 0.01);
    CHECK(mb.params.b0 > 0.0);
    CHECK(mb.params.b0 < 2.0 * mb.params.B);
    CHECK(mb.holds);
}
