#pragma once

#include <cmath>
#include <functional>

namespace kslab {

using ScalarRhs = std::function<double(double t, double y)>;

/// Classical four-stage step.
inline double rk4_step(const ScalarRhs& f, double t, double y, double h)
{
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates y' = f(t, y) from (t0, y0) to t1 with fixed step h; the last step is shortened.
inline double rk4_integrate(const ScalarRhs& f, double t0, double y0, double t1, double h)
{
    double t = t0, y = y0;
    while (t1 - t > 1e-14 * std::max(1.0, std::abs(t1))) {
        const double step = std::min(h, t1 - t);
        y = rk4_step(f, t, y, step);
        t += step;
    }
    return y;
}

}  // namespace kslab
