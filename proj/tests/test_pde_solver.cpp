#include <cmath>

#include "doctest.h"

#include "kslab/initial_data.hpp"
#include "kslab/solver.hpp"

using namespace kslab;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

// Manufactured solution w_star (1 - e^{-t} g) for n = 10, g a smooth bump in ln s on [0.01, 50].
struct Manufactured {
    static constexpr int n = 10;
    static constexpr double e = 1.0 - 2.0 / n;
    double La = std::log(0.01), Lb = std::log(50.0), k = M_PI / (Lb - La);

    bool inside(double s) const { return s > 0.01 && s < 50.0; }
    double g(double s) const { return inside(s) ? std::pow(std::sin(k * (std::log(s) - La)), 4) : 0.0; }
    double G1(double s) const
    {
        const double x = k * (std::log(s) - La);
        return 4.0 * k * std::pow(std::sin(x), 3) * std::cos(x);
    }
    double G2(double s) const
    {
        const double x = k * (std::log(s) - La), sn = std::sin(x), c = std::cos(x);
        return 4.0 * k * k * (3.0 * sn * sn * c * c - std::pow(sn, 4));
    }
    double g1(double s) const { return inside(s) ? G1(s) / s : 0.0; }
    double g2(double s) const { return inside(s) ? (G2(s) - G1(s)) / (s * s) : 0.0; }

    double w(double s, double t) const { return w_star(n, s) * (1.0 - std::exp(-t) * g(s)); }

    double forcing(double s, double t) const
    {
        if (s <= 0.0) return 0.0;
        const double E = std::exp(-t);
        const double W = 2.0 * std::pow(s, e), W1 = 2.0 * e * std::pow(s, e - 1.0),
                     W2 = 2.0 * e * (e - 1.0) * std::pow(s, e - 2.0);
        const double v = W * (1.0 - E * g(s));
        const double vs = W1 * (1.0 - E * g(s)) - W * E * g1(s);
        const double vss = W2 * (1.0 - E * g(s)) - 2.0 * W1 * E * g1(s) - W * E * g2(s);
        return W * E * g(s) - n * n * std::pow(s, 2.0 - 2.0 / n) * vss - n * v * vs;
    }

    MassFunction solve(std::size_t N, double dt, double T) const
    {
        const auto mesh = build_mesh(n, std::pow(2.0, n), N, Grading::uniform_in_r);
        MassFunction u{mesh, {}, 0.0};
        for (std::size_t j = 0; j < mesh->size(); ++j) u.values.push_back(w(mesh->s(j), 0.0));
        const Forcing f = [this](double s, double t) { return forcing(s, t); };
        const int steps = static_cast<int>(std::lround(T / dt));
        for (int i = 0; i < steps; ++i) u = step_w(u, dt, f);
        return u;
    }

    double error(const MassFunction& u, double T) const
    {
        double m = 0.0;
        for (std::size_t j = 0; j < u.mesh->size(); ++j) m = std::max(m, std::abs(u.values[j] - w(u.mesh->s(j), T)));
        return m;
    }
};

}  // namespace

TEST_CASE("w_star is a discrete steady state of the balanced scheme")
{
    for (int n : {3, 5, 10}) {
        for (auto g : {Grading::uniform_in_r, Grading::log, Grading::uniform_in_s}) {
            const auto mesh = build_mesh(n, std::pow(2.0, n), 256, g);
            const auto w = sample_w_star(mesh);
            for (auto tr : {Transport::implicit, Transport::explicit_upwind}) {
                const auto w1 = step_w(w, 1e-3, {}, StencilKind::balanced, tr);
                CAPTURE(n);
                CHECK(max_abs_diff(w1.values, w.values) / w.values.back() <= 1e-12);
            }
            const auto phi1 = step_phi(deviation(w), 1e-3);
            CHECK(max_abs_diff(phi1.values, deviation(w).values) / w.values.back() <= 1e-12);
        }
    }
}

TEST_CASE("zero states are fixed points")
{
    const auto mesh = build_mesh(6, 64.0, 128, Grading::uniform_in_r);
    const MassFunction w0{mesh, std::vector<double>(mesh->size(), 0.0), 0.0};
    for (double v : step_w(w0, 0.01).values) CHECK(v == 0.0);
    const DeviationField p0{mesh, std::vector<double>(mesh->size(), 0.0), 0.0};
    for (double v : step_phi(p0, 0.01).values) CHECK(v == 0.0);
}

TEST_CASE("steady residual: balanced stencils exact, polynomial ones second order away from the origin")
{
    for (int n : {3, 10}) {
        std::vector<double> res;
        for (std::size_t N : {256, 512, 1024}) {
            const auto mesh = build_mesh(n, std::pow(2.0, n), N, Grading::uniform_in_r);
            const auto w = sample_w_star(mesh);
            const auto rp = spatial_operator_w(w, StencilKind::polynomial);
            const auto rb = spatial_operator_w(w, StencilKind::balanced);
            const double e = 1.0 - 2.0 / n;
            double worst_poly = 0.0, worst_bal = 0.0;
            for (std::size_t j = 1; j < N; ++j) {
                const double s = mesh->s(j);
                const double scale = n * n * std::pow(s, 2.0 - 2.0 / n) * std::abs(2.0 * e * (e - 1.0) * std::pow(s, e - 2.0));
                worst_bal = std::max(worst_bal, std::abs(rb[j]) / scale);
                if (j >= N / 4) worst_poly = std::max(worst_poly, std::abs(rp[j]) / scale);
            }
            CAPTURE(n);
            CHECK(worst_bal <= 1e-8);
            res.push_back(worst_poly);
        }
        CHECK(std::log2(res[0] / res[1]) >= 1.9);
        CHECK(std::log2(res[1] / res[2]) >= 1.9);
    }
}

TEST_CASE("manufactured solution: second order in h, first order in dt")
{
    const Manufactured m;
    const double T = 0.5;
    std::vector<double> err;
    for (std::size_t N : {128, 256, 512}) {
        // Richardson in time removes the first-order time error
        const auto a = m.solve(N, 1e-3, T);
        auto b = m.solve(N, 5e-4, T);
        for (std::size_t j = 0; j < b.values.size(); ++j) b.values[j] = 2.0 * b.values[j] - a.values[j];
        err.push_back(m.error(b, T));
    }
    CHECK(std::log2(err[0] / err[1]) >= 1.9);
    CHECK(std::log2(err[1] / err[2]) >= 1.9);

    const auto c1 = m.solve(128, 0.02, T), c2 = m.solve(128, 0.01, T), c3 = m.solve(128, 0.005, T);
    const double d12 = max_abs_diff(c1.values, c2.values), d23 = max_abs_diff(c2.values, c3.values);
    CHECK(std::log2(d12 / d23) >= 0.9);
}

TEST_CASE("reaction-only deviation grows at the frozen-s exponential rate")
{
    const int n = 10;
    const auto mesh = build_mesh(n, std::pow(2.0, n), 64, Grading::uniform_in_r);
    DeviationField phi{mesh, std::vector<double>(mesh->size(), 0.0), 0.0};
    // nodes decouple without the derivative terms; seed only where the rate is moderate
    for (std::size_t j = 1; j < mesh->size(); ++j) {
        if (mesh->s(j) >= 0.25 && mesh->s(j) <= 4.0) phi.values[j] = 1e-3 * w_star(n, mesh->s(j));
    }
    const auto phi0 = phi;
    PhiTerms terms;
    terms.diffusion = terms.drift = terms.transport = false;
    const double dt = 1e-5, T = 0.1;
    for (int i = 0; i < static_cast<int>(std::lround(T / dt)); ++i) phi = step_phi(phi, dt, terms);
    for (std::size_t j = 1; j + 1 < mesh->size(); ++j) {
        const double s = mesh->s(j);
        if (s < 0.5 || s > 2.0) continue;
        const double expected = phi0.values[j] * std::exp(2.0 * (n - 2) * std::pow(s, -2.0 / n) * T);
        CHECK(phi.values[j] == doctest::Approx(expected).epsilon(0.01));
    }
}

TEST_CASE("w-form and phi-form runs agree within ten times the scheme error")
{
    const int n = 10;
    auto make = [&](std::size_t N) {
        const auto mesh = build_mesh(n, std::pow(60.0, n), N, Grading::log);
        InitialDatumSpec spec;
        return make_datum(mesh, spec);
    };
    SolverConfig cfg;
    cfg.output_count = 5;
    const auto u0 = make(512);
    const auto tw = run(u0, cfg, 10.0);
    cfg.formulation = Formulation::phi_form;
    const auto tp = run(u0, cfg, 10.0);
    REQUIRE(tw.snapshots.size() == tp.snapshots.size());
    const double diff = max_abs_diff(tw.final().values, tp.final().values);

    // scheme error: w-form at N against N doubled, on the shared nodes
    SolverConfig cw;
    cw.output_count = 5;
    const auto fine = run(make(1024), cw, 10.0);
    double scheme = 0.0;
    for (std::size_t j = 0; j < tw.final().values.size(); ++j)
        scheme = std::max(scheme, std::abs(tw.final().values[j] - fine.final().values[2 * j]));
    CHECK(scheme > 0.0);
    CHECK(diff <= 10.0 * scheme);
}

TEST_CASE("run from zero data stays zero")
{
    const auto mesh = build_mesh(5, std::pow(10.0, 5), 128, Grading::log);
    const RadialDensity u0{mesh, std::vector<double>(mesh->size(), 0.0)};
    SolverConfig cfg;
    cfg.output_count = 4;
    const auto tr = run(u0, cfg, 2.0);
    REQUIRE(tr.snapshots.size() == 5);
    for (const auto& w : tr.snapshots) {
        for (double v : w.values) CHECK(v == 0.0);
    }
    CHECK_FALSE(tr.exploded);
}

TEST_CASE("pinched n = 10 run: invariants hold and the sup-norm increases")
{
    const int n = 10;
    const auto mesh = build_mesh(n, std::pow(60.0, n), 512, Grading::log);
    SolverConfig cfg;
    cfg.output_count = 20;
    const auto tr = run(make_datum(mesh, InitialDatumSpec{}), cfg, 20.0);
    CHECK(tr.status == "ok");
    CHECK(tr.invariants.holds(cfg.invariant_tol));
    double prev = 0.0;
    for (const auto& w : tr.snapshots) {
        double sup = 0.0;
        for (double v : w_to_u(w).values) sup = std::max(sup, v);
        CHECK(sup > prev);
        prev = sup;
    }
    const auto times = tr.times();
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
    CHECK(manifest_json(tr, cfg).find("\"transport\"") != std::string::npos);
}

TEST_CASE("scaled n = 5 run: the sup-norm is eventually nonincreasing")
{
    const int n = 5;
    const auto mesh = build_mesh(n, std::pow(60.0, n), 512, Grading::log);
    InitialDatumSpec spec;
    spec.n = n;
    spec.family = DatumFamily::scaled_chandrasekhar;
    spec.a = 0.9;
    SolverConfig cfg;
    cfg.output_count = 40;
    const auto tr = run(make_datum(mesh, spec), cfg, 40.0);
    CHECK(tr.invariants.holds(cfg.invariant_tol));
    std::vector<double> sup;
    for (const auto& w : tr.snapshots) {
        double m = 0.0;
        for (double v : w_to_u(w).values) m = std::max(m, v);
        sup.push_back(m);
    }
    for (std::size_t i = sup.size() / 2 + 1; i < sup.size(); ++i) CHECK(sup[i] <= sup[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("overflow guard truncates the trajectory and flags it")
{
    const auto mesh = build_mesh(10, std::pow(60.0, 10), 128, Grading::log);
    SolverConfig cfg;
    cfg.overflow_guard = 1.0;
    const auto tr = run(make_datum(mesh, InitialDatumSpec{}), cfg, 1.0);
    CHECK(tr.exploded);
    CHECK(tr.status.find("numerically exploded") != std::string::npos);
}

TEST_CASE("output times, names and the CFL limit")
{
    SolverConfig cfg;
    cfg.output_times = {0.5, 0.25, 1.0, 3.0};
    const auto t = resolve_output_times(cfg, 2.0);
    CHECK(t == std::vector<double>{0.0, 0.5, 1.0, 2.0});
    cfg.output_times.clear();
    cfg.output_count = 4;
    CHECK(resolve_output_times(cfg, 2.0).size() == 5);

    for (auto f : {Formulation::w_form, Formulation::phi_form}) CHECK(formulation_from_string(to_string(f)) == f);
    for (auto k : {StencilKind::balanced, StencilKind::polynomial}) CHECK(stencil_from_string(to_string(k)) == k);
    for (auto tr : {Transport::implicit, Transport::explicit_upwind}) CHECK(transport_from_string(to_string(tr)) == tr);
    CHECK_THROWS_AS(transport_from_string("sideways"), std::invalid_argument);

    const auto mesh = build_mesh(3, 8.0, 4, Grading::uniform_in_s);
    CHECK(cfl_limit(*mesh, {0.0, 1.0, 1.0, 1.0, 1.0}, 0.5) == doctest::Approx(0.5 * 2.0 / 3.0));
}
