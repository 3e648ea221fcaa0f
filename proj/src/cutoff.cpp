#include "kslab/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kslab {

Jet2 chi_jet(double t)
{
    if (t <= 1.0) return {0.0, 0.0, 0.0};
    if (t >= 2.0) return {1.0, 0.0, 0.0};
    // chi = exp(g), g = 1 + 1/q, q = (t-2)^2 - 1 < 0 on (1,2)
    const double a = t - 2.0;
    const double q = a * a - 1.0;
    const double value = std::exp(1.0 + 1.0 / q);
    const double g1 = -2.0 * a / (q * q);
    const double g2 = -2.0 / (q * q) + 8.0 * a * a / (q * q * q);
    return {value, value * g1, value * (g1 * g1 + g2)};
}

double chi(double t) { return chi_jet(t).value; }

Jet2 zeta_jet(double eps, double s)
{
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("zeta: eps must lie in (0,1)");
    if (s <= 1.0) {
        const double k = 2.0 / eps;
        const Jet2 c = chi_jet(k * s);
        return {c.value, k * c.d1, k * k * c.d2};
    }
    const Jet2 c = chi_jet(eps * s);
    return {1.0 - c.value, -eps * c.d1, -eps * eps * c.d2};
}

double zeta(double eps, double s) { return zeta_jet(eps, s).value; }
double zeta_d1(double eps, double s) { return zeta_jet(eps, s).d1; }
double zeta_d2(double eps, double s) { return zeta_jet(eps, s).d2; }

namespace {

ChiBounds compute_bounds()
{
    auto scan = [](int m) {
        double d1 = 0.0, d2 = 0.0;
        for (int i = 1; i < m; ++i) {
            const Jet2 c = chi_jet(1.0 + static_cast<double>(i) / m);
            d1 = std::max(d1, std::abs(c.d1));
            d2 = std::max(d2, std::abs(c.d2));
        }
        return ChiBounds{d1, d2, std::max(2.0 * d1, 4.0 * d2)};
    };
    int m = 1024;
    ChiBounds prev = scan(m);
    for (int iter = 0; iter < 20; ++iter) {
        m *= 2;
        ChiBounds cur = scan(m);
        const bool stable = std::abs(cur.k_chi - prev.k_chi) <= 1e-6 * cur.k_chi &&
                            std::abs(cur.max_d1 - prev.max_d1) <= 1e-6 * cur.max_d1;
        prev = cur;
        if (stable) break;
    }
    // polish both maxima by golden-section search around the best grid point
    auto polish = [m](auto f) {
        double best_t = 1.5, best = 0.0;
        for (int i = 1; i < m; ++i) {
            const double t = 1.0 + static_cast<double>(i) / m;
            if (f(t) > best) {
                best = f(t);
                best_t = t;
            }
        }
        double a = best_t - 1.0 / m, b = best_t + 1.0 / m;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int k = 0; k < 200 && b - a > 1e-15; ++k) {
            const double x1 = b - g * (b - a), x2 = a + g * (b - a);
            if (f(x1) < f(x2)) a = x1;
            else b = x2;
        }
        return std::max(best, f(0.5 * (a + b)));
    };
    prev.max_d1 = polish([](double t) { return std::abs(chi_jet(t).d1); });
    prev.max_d2 = polish([](double t) { return std::abs(chi_jet(t).d2); });
    prev.k_chi = std::max(2.0 * prev.max_d1, 4.0 * prev.max_d2);
    return prev;
}

}  // namespace

const ChiBounds& chi_bounds()
{
    static const ChiBounds bounds = compute_bounds();
    return bounds;
}

double k_chi() { return chi_bounds().k_chi; }

}  // namespace kslab
