#include "kslab/stencil.hpp"

#include <stdexcept>

namespace kslab {

Weights3 central_first(double hm, double hp)
{
    return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

Weights3 central_second(double hm, double hp)
{
    return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

Weights3 fit_weights(const Weights3& poly, const Stencil3& st, double target)
{
    const double* x = st.x;
    const double* g = st.g;
    const Weights3 z{1.0 / ((x[0] - x[1]) * (x[0] - x[2])), 1.0 / ((x[1] - x[0]) * (x[1] - x[2])),
                     1.0 / ((x[2] - x[0]) * (x[2] - x[1]))};
    const double divided = z.left * g[0] + z.centre * g[1] + z.right * g[2];
    if (divided == 0.0) return poly;
    const double applied = poly.left * g[0] + poly.centre * g[1] + poly.right * g[2];
    const double lambda = (target - applied) / divided;
    return {poly.left + lambda * z.left, poly.centre + lambda * z.centre, poly.right + lambda * z.right};
}

std::vector<double> first_derivative(std::span<const double> x, std::span<const double> f)
{
    const std::size_t m = x.size();
    if (m != f.size() || m < 3) throw std::invalid_argument("first_derivative: need >= 3 matching samples");
    std::vector<double> d(m);
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const auto w = central_first(x[j] - x[j - 1], x[j + 1] - x[j]);
        d[j] = w.left * f[j - 1] + w.centre * f[j] + w.right * f[j + 1];
    }
    {
        const double h1 = x[1] - x[0], h2 = x[2] - x[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
    }
    {
        const std::size_t k = m - 1;
        const double h1 = x[k] - x[k - 1], h2 = x[k - 1] - x[k - 2];
        d[k] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[k] - (h1 + h2) / (h1 * h2) * f[k - 1] + h1 / (h2 * (h1 + h2)) * f[k - 2];
    }
    return d;
}

std::vector<double> second_derivative(std::span<const double> x, std::span<const double> f)
{
    const std::size_t m = x.size();
    if (m != f.size() || m < 3) throw std::invalid_argument("second_derivative: need >= 3 matching samples");
    std::vector<double> d(m);
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const auto w = central_second(x[j] - x[j - 1], x[j + 1] - x[j]);
        d[j] = w.left * f[j - 1] + w.centre * f[j] + w.right * f[j + 1];
    }
    d[0] = d[1];
    d[m - 1] = d[m - 2];
    return d;
}

double trapezoid(std::span<const double> x, std::span<const double> f)
{
    if (x.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
    double acc = 0.0;
    for (std::size_t j = 1; j < x.size(); ++j) acc += 0.5 * (x[j] - x[j - 1]) * (f[j] + f[j - 1]);
    return acc;
}

}  // namespace kslab
