#include "kslab/tridiagonal.hpp"

#include <cmath>

namespace kslab {

bool solve_tridiagonal(const std::vector<double>& lower, std::vector<double> diag, const std::vector<double>& upper,
                       std::vector<double>& rhs)
{
    const std::size_t m = diag.size();
    if (m == 0 || lower.size() != m || upper.size() != m || rhs.size() != m) return false;
    for (std::size_t i = 1; i < m; ++i) {
        if (diag[i - 1] == 0.0 || !std::isfinite(diag[i - 1])) return false;
        const double f = lower[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    if (diag[m - 1] == 0.0 || !std::isfinite(diag[m - 1])) return false;
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    for (double v : rhs)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace kslab
