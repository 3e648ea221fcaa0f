#include <cmath>
#include <random>

#include "doctest.h"

#include "kslab/initial_data.hpp"

using namespace kslab;

namespace {

MeshPtr mesh10() { return build_mesh(10, std::pow(30.0, 10), 1024, Grading::log); }

}  // namespace

TEST_CASE("pinched datum")
{
    const auto mesh = build_mesh(10, std::pow(4.0, 10), 1024, Grading::uniform_in_r);
    const auto u = make_pinched(mesh, 5.0, 1.0, 16.0);
    const std::size_t j1 = mesh->lower_index(1.0);
    REQUIRE(mesh->r(j1) == doctest::Approx(1.0));
    CHECK(u.values[j1] == doctest::Approx(15.0));
    CHECK(check_init(u).passes);
    CHECK_THROWS_AS(make_pinched(mesh, 5.0, 1.0, 14.0), std::invalid_argument);

    const auto far = make_pinched(mesh10(), 5.0, 1.0, 0.0 + 32.0);
    const auto& m = *far.mesh;
    CHECK(far.values.back() / u_star(10, m.r_max()) == doctest::Approx(1.0).epsilon(1e-6));
    // tail condition at r >= 1
    for (std::size_t j = 1; j < m.size(); ++j) {
        if (m.r(j) >= 1.0) CHECK(far.values[j] >= u_star(10, m.r(j)) - std::pow(m.r(j), -7.0) - 1e-12);
    }
}

TEST_CASE("random admissible pinched data pass check_init")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto mesh = mesh10();
    for (int k = 0; k < 20; ++k) {
        const double theta = 0.5 + 7.0 * U(rng);
        const double C = 0.1 + 3.0 * U(rng);
        const double cap = std::max(u_star(10, 1.0) - C, 0.0) * (1.0 + 5.0 * U(rng)) + 1e-3;
        const auto u = make_pinched(mesh, theta, C, cap);
        CHECK(check_init(u).passes);
        CHECK(less_concentrated(u, sample_u_star(mesh)));
    }
}

TEST_CASE("scaled datum")
{
    const auto mesh = build_mesh(3, 27.0, 512, Grading::uniform_in_r);
    for (double v : make_scaled(mesh, 0.0, 5.0).values) CHECK(v == 0.0);
    const auto u = make_scaled(mesh, 1.0, 1e3);
    const double r_bind = std::sqrt(2.0 / 1e3);
    for (std::size_t j = 1; j < mesh->size(); ++j) {
        if (mesh->r(j) >= r_bind) CHECK(u.values[j] == doctest::Approx(u_star(3, mesh->r(j))));
        else CHECK(u.values[j] == 1e3);
    }
    CHECK(less_concentrated(make_scaled(mesh, 0.5, 1e3), sample_u_star(mesh)));
    CHECK_THROWS_AS(make_scaled(mesh, 1.5, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(make_scaled(mesh, -0.1, 10.0), std::invalid_argument);
}

TEST_CASE("compact bump and zero data")
{
    const auto mesh = build_mesh(5, std::pow(3.0, 5), 256, Grading::uniform_in_r);
    const auto u = make_compact_bump(mesh, 0.8, 1.5);
    CHECK(check_init(u).passes);
    for (std::size_t j = 0; j < mesh->size(); ++j) {
        if (mesh->r(j) >= 1.5) CHECK(u.values[j] == 0.0);
    }
    InitialDatumSpec z;
    z.n = 5;
    z.family = DatumFamily::zero;
    for (double v : make_datum(mesh, z).values) CHECK(v == 0.0);
}

TEST_CASE("check_init reports violations")
{
    const auto mesh = build_mesh(4, 16.0, 128, Grading::uniform_in_r);
    auto u = sample_u_star(mesh);
    for (auto& v : u.values) v *= 1.01;
    const auto rep = check_init(u);
    CHECK_FALSE(rep.passes);
    CHECK(rep.max_violation == doctest::Approx(0.01 * u_star(4, mesh->r(1))));
    CHECK(rep.violation_radius == doctest::Approx(mesh->r(1)));
    CHECK(check_init(RadialDensity{mesh, std::vector<double>(mesh->size(), 0.0)}).passes);
}

TEST_CASE("less_concentrated is a partial order on the families")
{
    const auto mesh = mesh10();
    const auto star = sample_u_star(mesh);
    auto half = star;
    for (auto& v : half.values) v *= 0.5;
    CHECK(less_concentrated(half, star));
    CHECK_FALSE(less_concentrated(star, half));
    CHECK(less_concentrated(star, star));

    const auto a = make_scaled(mesh, 0.3, 50.0);
    const auto b = make_scaled(mesh, 0.6, 50.0);
    const auto c = make_pinched(mesh, 5.0, 1.0, 32.0);
    CHECK(less_concentrated(a, b));
    CHECK(less_concentrated(b, c) == less_concentrated(b, c));
    if (less_concentrated(b, c)) CHECK(less_concentrated(a, c));
    CHECK(less_concentrated(c, star));
    const auto other = build_mesh(10, std::pow(30.0, 10), 512, Grading::log);
    CHECK_THROWS_AS(less_concentrated(make_scaled(other, 0.3, 5.0), star), std::invalid_argument);
}

TEST_CASE("growth exponent and sup_growth")
{
    CHECK(alpha_of(10, 5.0) == doctest::Approx(0.3));
    CHECK_THROWS_AS(alpha_of(10, 8.0), std::domain_error);
    CHECK_THROWS_AS(alpha_of(10, 0.0), std::domain_error);
    const auto mesh = mesh10();
    const auto phi0 = deviation(u_to_w(make_pinched(mesh, 5.0, 1.0, 32.0)));
    const double g = sup_growth(phi0, 0.3);
    CHECK(g > 0.0);
    CHECK(g <= 2.0 + 1.0 / 3.0);
    DeviationField zero{mesh, std::vector<double>(mesh->size(), 0.0), 0.0};
    CHECK(sup_growth(zero, 0.3) == 0.0);
}

TEST_CASE("family names and caps")
{
    for (auto f : {DatumFamily::pinched_chandrasekhar, DatumFamily::scaled_chandrasekhar, DatumFamily::compact_bump,
                   DatumFamily::zero})
        CHECK(datum_family_from_string(to_string(f)) == f);
    CHECK_THROWS_AS(datum_family_from_string("gaussian"), std::invalid_argument);
    InitialDatumSpec s;
    CHECK(minimal_cap(s) == doctest::Approx(15.0));
    CHECK(default_cap(s) == doctest::Approx(30.0));
}
