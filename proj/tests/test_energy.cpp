#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"

#include "kslab/energy.hpp"
#include "kslab/initial_data.hpp"

using namespace kslab;

namespace {

MassFunction zero_mass(const MeshPtr& mesh, double t = 0.0)
{
    return MassFunction{mesh, std::vector<double>(mesh->size(), 0.0), t};
}

// Short n = 10 pinched run shared by the trajectory tests.
const Trajectory& pinched_run(std::size_t N)
{
    static std::map<std::size_t, Trajectory> cache;
    auto it = cache.find(N);
    if (it == cache.end()) {
        const auto mesh = build_mesh(10, std::pow(60.0, 10), N, Grading::log);
        SolverConfig cfg;
        cfg.accuracy_tol = 1e-6;
        cfg.output_times = resolve_output_times(SolverConfig{}, 4.0);
        for (double t : {2.0 - 1e-3, 2.0, 2.0 + 1e-3}) cfg.output_times.push_back(t);
        for (int k = 0; k <= 60; ++k) cfg.output_times.push_back(1e-4 * std::pow(10.0, k / 20.0));
        std::sort(cfg.output_times.begin(), cfg.output_times.end());
        cfg.output_times.erase(std::unique(cfg.output_times.begin(), cfg.output_times.end()), cfg.output_times.end());
        it = cache.emplace(N, run(make_datum(mesh, InitialDatumSpec{}), cfg, 4.0)).first;
    }
    return it->second;
}

}  // namespace

TEST_CASE("p bounds")
{
    const auto [a, b] = p_bounds(10, 5.0);
    CHECK(a == doctest::Approx(10.5));
    CHECK(b == doctest::Approx(10.5));
    const auto [c, d] = p_bounds(18, 2.0);
    CHECK(c == doctest::Approx(1.4645).epsilon(1e-4));
    CHECK(d == doctest::Approx(8.5355).epsilon(1e-4));
    CHECK_THROWS_AS(p_bounds(9, 2.0), std::domain_error);
    CHECK_THROWS_AS(p_bounds(10, 0.8), std::domain_error);
}

TEST_CASE("theta thresholds")
{
    CHECK(theta_threshold(10) == doctest::Approx(4.0));
    CHECK(theta_threshold(11) == doctest::Approx(6.0));
    CHECK(theta_threshold(18) == doctest::Approx(13.6569).epsilon(1e-5));
    CHECK_THROWS_AS(theta_threshold(9), std::domain_error);
}

TEST_CASE("select_params returns admissible exponents")
{
    const auto q = select_params(11, 6.5);
    CHECK(admissibility(11, q).all());
    const auto r = select_params(10, 4.2);
    CHECK(r.alpha == doctest::Approx(0.38));
    CHECK(admissibility(10, r).all());
    CHECK(r.p == doctest::Approx(p_bounds(10, r.gamma).second));
    for (int n : {12, 15, 18, 30}) {
        const double th = 0.5 * (theta_threshold(n) + n - 2.0);
        CHECK(admissibility(n, select_params(n, th)).all());
    }
    CHECK_THROWS_AS(select_params(10, 3.0), std::domain_error);
    CHECK_THROWS_AS(select_params(10, 8.0), std::domain_error);
}

TEST_CASE("admissibility flags fail individually")
{
    const EnergyParams good = select_params(10, 5.0);
    auto bad = good;
    bad.p = 0.9;
    CHECK_FALSE(admissibility(10, bad).p_above_one);
    bad = good;
    bad.gamma = 0.5;
    CHECK_FALSE(admissibility(10, bad).gamma_above_floor);
    bad = good;
    bad.alpha = 10.0;
    CHECK_FALSE(admissibility(10, bad).tail_weight);
    bad = good;
    bad.p = good.p * 1.01;
    CHECK_FALSE(admissibility(10, bad).p_in_window);
}

TEST_CASE("phi functional")
{
    const auto mesh = build_mesh(10, 1024.0, 1024, Grading::uniform_in_r);
    const auto zero_phi = deviation(sample_w_star(mesh));
    CHECK(phi_functional(zero_phi, EnergyParams{10.5, 5.0, 0.0, 0.0}) == 0.0);

    // phi = w_star: 2^p int s^{p(1-2/n) - gamma}
    const EnergyParams q{10.5, 5.0, 0.0, 0.0};
    const double k = q.p * 0.8 - q.gamma + 1.0;
    auto err = [&](std::size_t N) {
        const auto m = build_mesh(10, 1024.0, N, Grading::uniform_in_r);
        const double exact = std::pow(2.0, q.p) / k * (std::pow(m->s_max(), k) - std::pow(m->s(1), k));
        return std::abs(phi_functional(deviation(zero_mass(m)), q) / exact - 1.0);
    };
    CHECK(err(1024) < 1e-3);
    CHECK(std::log2(err(512) / err(1024)) > 1.9);

    // eps -> 0 is monotone
    const auto phi = deviation(u_to_w(make_datum(mesh, InitialDatumSpec{})));
    double prev = 0.0;
    for (double eps : {0.4, 0.2, 0.1, 0.05, 0.025}) {
        const double v = phi_functional(phi, EnergyParams{10.5, 5.0, 0.0, eps});
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev <= phi_functional(phi, EnergyParams{10.5, 5.0, 0.0, 0.0}));
}

TEST_CASE("identity on the steady trajectory is zero")
{
    const auto mesh = build_mesh(10, std::pow(10.0, 10), 256, Grading::log);
    Trajectory tr;
    for (double t : {0.0, 1.0, 2.0}) tr.snapshots.push_back(sample_w_star(mesh, t));
    auto q = select_params(10, 5.0);
    q.eps = 0.05;
    const auto rec = energy_identity(tr, q, 1.0);
    CHECK(rec.lhs == 0.0);
    CHECK(rec.rhs_sum == 0.0);
    CHECK_THROWS_AS(energy_identity(tr, q, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(energy_identity(tr, EnergyParams{10.5, 5.0, 0.3, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("cubic absorption term is never positive")
{
    const auto mesh = build_mesh(10, std::pow(60.0, 10), 512, Grading::log);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        InitialDatumSpec spec;
        spec.theta = 4.5 + 3.0 * U(rng);
        spec.C = 0.2 + 0.8 * U(rng);
        const auto phi = deviation(u_to_w(make_datum(mesh, spec)));
        auto q = select_params(10, spec.theta);
        q.eps = 0.02;
        const auto terms = identity_terms(phi, q);
        CHECK(identity_term_names()[2] == "cubic_absorption");
        CHECK(terms[2] <= 0.0);
    }
}

TEST_CASE("identity holds along a pinched n = 10 run")
{
    auto q = select_params(10, 5.0);
    q.eps = 0.01;
    const auto coarse = energy_identity(pinched_run(1024), q, 2.0);
    const auto fine = energy_identity(pinched_run(2048), q, 2.0);
    MESSAGE("identity mismatch N=1024: " << coarse.mismatch() << ", N=2048: " << fine.mismatch());
    CHECK(fine.mismatch() <= 1e-2);
    CHECK(fine.mismatch() < coarse.mismatch());
    double sum = 0.0;
    for (double v : fine.terms) sum += v;
    CHECK(sum == doctest::Approx(fine.rhs_sum));
}

TEST_CASE("Hardy inequality on a tent")
{
    std::vector<double> s, psi;
    for (int j = 0; j <= 2000; ++j) {
        const double x = 1.0 + 2.0 * j / 2000.0;
        s.push_back(x);
        psi.push_back(1.0 - std::abs(x - 2.0));
    }
    const auto r = hardy_check(s, psi, 2.0);
    CHECK(r.holds);
    // the right side is 4 int psi_s^2 = 8 up to the kink
    CHECK(r.rhs == doctest::Approx(8.0).epsilon(1e-2));
    const auto z = hardy_check(s, std::vector<double>(s.size(), 0.0), 2.0);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    CHECK(z.holds);
    CHECK_THROWS_AS(hardy_check(s, psi, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(hardy_check(s, std::vector<double>(3, 0.0), 2.0), std::invalid_argument);
}

TEST_CASE("Hardy inequality on 1000 random bumps")
{
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = 0.05 + 3.0 * U(rng), b = a * (1.1 + 5.0 * U(rng)), beta = 1.1 + 4.9 * U(rng);
        const double c = a + (b - a) * (0.2 + 0.6 * U(rng));
        std::vector<double> s(601), psi(601);
        for (std::size_t j = 0; j < s.size(); ++j) {
            s[j] = a + (b - a) * j / 600.0;
            const double x = (s[j] - a) / (b - a);
            psi[j] = std::pow(std::sin(M_PI * x), 2.0) * std::exp(-std::pow((s[j] - c) / (b - a), 2.0));
        }
        CHECK(hardy_check(s, psi, beta).holds);
    }
}

TEST_CASE("weighted Hardy bound")
{
    const auto mesh = build_mesh(10, std::pow(60.0, 10), 2048, Grading::log);
    const auto phi = deviation(zero_mass(mesh));
    const auto r = weighted_hardy_bound(phi, EnergyParams{10.5, 5.0, 0.0, 0.05});
    CHECK(r.holds);
    CHECK(r.lhs > 0.0);
    const auto z = weighted_hardy_bound(deviation(sample_w_star(mesh)), EnergyParams{10.5, 5.0, 0.0, 0.05});
    CHECK(z.lhs == 0.0);
    CHECK(z.holds);
    // the ratio is stable under eps halving
    const double r1 = r.lhs / r.rhs;
    const auto h = weighted_hardy_bound(phi, EnergyParams{10.5, 5.0, 0.0, 0.025});
    CHECK(h.lhs / h.rhs == doctest::Approx(r1).epsilon(0.05));
}

TEST_CASE("dissipation")
{
    const auto mesh = build_mesh(10, std::pow(10.0, 10), 256, Grading::log);
    Trajectory steady;
    for (double t : {0.0, 1.0, 2.0}) steady.snapshots.push_back(sample_w_star(mesh, t));
    for (double v : dissipation_integral(steady, select_params(10, 5.0))) CHECK(v == 0.0);

    auto q = select_params(10, 5.0);
    q.eps = 0.0;
    const auto& tr = pinched_run(1024);
    const auto d = dissipation_integral(tr, q);
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] >= d[i - 1]);
    const double bound = dissipation_bound(deviation(tr.snapshots.front()), q);
    MESSAGE("dissipation to t = 4: " << d.back() << ", bound " << bound);
    CHECK(d.back() <= bound);
}

// Rates are asymptotic: the origin layer needs eps below the core of the datum and the
// tail layer a horizon short against the growth of phi. The tail rate 0.3 means a
// factor 2^0.3 per halving.
TEST_CASE("cutoff layer integrals decay at the predicted rates")
{
    const auto mesh = build_mesh(10, std::pow(60.0, 10), 1024, Grading::log);
    SolverConfig cfg;
    cfg.accuracy_tol = 1e-6;
    cfg.output_count = 200;
    const auto tr = run(make_datum(mesh, InitialDatumSpec{}), cfg, 0.1);
    const auto q = select_params(10, 5.0);
    const auto table = cutoff_error_decay(tr, q, {1e-4, 5e-5, 2.5e-5, 1.25e-5}, 0.1);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.origin_exponent == doctest::Approx(1.2));
    CHECK(table.tail_exponent == doctest::Approx(0.3));
    for (std::size_t c = 0; c < 7; ++c) {
        MESSAGE(cutoff_layer_names()[c] << ": slope " << table.measured_slope(c) << " vs "
                                        << table.analytic_exponent(c) << ", halving "
                                        << table.min_halving_factor(c));
        CHECK(table.measured_slope(c) == doctest::Approx(table.analytic_exponent(c)).epsilon(0.15));
        if (c < 4) CHECK(table.min_halving_factor(c) >= 1.5);
        else CHECK(table.min_halving_factor(c) >= 0.95 * std::pow(2.0, table.tail_exponent));
    }
    CHECK_THROWS(cutoff_error_decay(tr, q, {1.5}, 0.1));
}
