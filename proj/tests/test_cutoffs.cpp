#include <cmath>
#include <random>

#include "doctest.h"

#include "kslab/cutoff.hpp"

using namespace kslab;

TEST_CASE("chi examples")
{
    CHECK(chi(0.0) == 0.0);
    CHECK(chi(0.5) == 0.0);
    CHECK(chi(1.0) == 0.0);
    CHECK(chi(2.0) == 1.0);
    CHECK(chi(3.0) == 1.0);
    CHECK(chi(1.5) == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-14));
    CHECK(chi(1.5) == doctest::Approx(0.7165).epsilon(1e-4));
}

TEST_CASE("chi is a smooth nondecreasing step with closed-form derivatives")
{
    double prev = 0.0;
    for (int k = 0; k <= 3000; ++k) {
        const double t = 3.0 * k / 3000.0;
        const auto j = chi_jet(t);
        REQUIRE(j.value >= prev);
        REQUIRE(j.value >= 0.0);
        REQUIRE(j.value <= 1.0);
        REQUIRE(j.d1 >= 0.0);
        prev = j.value;
        if (t > 1.01 && t < 1.99) {
            const double h = 1e-6;
            CHECK(j.d1 == doctest::Approx((chi(t + h) - chi(t - h)) / (2 * h)).epsilon(1e-6));
            CHECK(j.d2 == doctest::Approx((chi_jet(t + h).d1 - chi_jet(t - h).d1) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("zeta examples and support")
{
    CHECK(zeta(0.1, 0.5) == 1.0);
    CHECK(zeta(0.1, 0.04) == 0.0);
    CHECK(zeta(0.1, 30.0) == 0.0);
    for (double s : {0.1, 1.0, 5.0, 10.0}) CHECK(zeta(0.1, s) == 1.0);
    CHECK(zeta(0.1, 0.0) == 0.0);
    CHECK(zeta(0.1, 20.0) == 0.0);
    const auto j = zeta_jet(0.2, 0.15);
    CHECK(j.value == zeta(0.2, 0.15));
    CHECK(j.d1 == zeta_d1(0.2, 0.15));
    CHECK(j.d2 == zeta_d2(0.2, 0.15));
}

TEST_CASE("k_chi")
{
    const auto& b = chi_bounds();
    CHECK(b.k_chi == k_chi());
    CHECK(b.k_chi >= 2.0 * b.max_d1);
    CHECK(b.k_chi >= 4.0 * b.max_d2);
    CHECK(2.0 * b.max_d1 >= 2.0);
    CHECK(b.k_chi == std::max(2.0 * b.max_d1, 4.0 * b.max_d2));
}

TEST_CASE("derivative bounds of the cutoff on dense grids")
{
    const double K = k_chi();
    for (double eps : {0.5, 0.1, 0.01}) {
        CAPTURE(eps);
        const int M = 200000;
        double worst_first = 0.0, worst_second = 0.0, worst_tail_first = 0.0, worst_tail_second = 0.0;
        for (int k = 1; k < M; ++k) {
            const double s = 0.5 * eps + 0.5 * eps * k / M;
            worst_first = std::max(worst_first, std::abs(zeta_d1(eps, s)) * eps / K);
            worst_second = std::max(worst_second, std::abs(zeta_d2(eps, s)) * eps * eps / K);
            const double S = 1.0 / eps + (1.0 / eps) * k / M;
            worst_tail_first = std::max(worst_tail_first, std::abs(zeta_d1(eps, S)) / (K * eps));
            worst_tail_second = std::max(worst_tail_second, std::abs(zeta_d2(eps, S)) / (K * eps * eps));
        }
        CHECK(worst_first <= 1.0 + 1e-12);
        CHECK(worst_second <= 1.0 + 1e-12);
        CHECK(worst_tail_first <= 1.0 + 1e-12);
        CHECK(worst_tail_second <= 1.0 + 1e-12);
    }
}

TEST_CASE("random property: range and sign of the derivative")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ue(1e-3, 0.9), ls(-8.0, 8.0);
    for (int k = 0; k < 100; ++k) {
        const double eps = ue(rng);
        const double s = std::exp(ls(rng));
        const auto j = zeta_jet(eps, s);
        CHECK(j.value >= 0.0);
        CHECK(j.value <= 1.0);
        if (s < 1.0) CHECK(j.d1 >= 0.0);
        if (s > 1.0) CHECK(j.d1 <= 0.0);
    }
}

TEST_CASE("the family increases to 1 as eps decreases")
{
    for (double s : {0.03, 0.06, 0.12, 8.0, 15.0, 30.0, 70.0}) {
        double prev = 0.0;
        for (double eps : {0.2, 0.1, 0.05, 0.025}) {
            const double z = zeta(eps, s);
            CHECK(z >= prev);
            prev = z;
        }
    }
}
