#include "kslab/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kslab {

std::string to_string(DatumFamily f)
{
    switch (f) {
    case DatumFamily::pinched_chandrasekhar: return "pinched_chandrasekhar";
    case DatumFamily::scaled_chandrasekhar: return "scaled_chandrasekhar";
    case DatumFamily::compact_bump: return "compact_bump";
    case DatumFamily::zero: return "zero";
    }
    return "unknown";
}

DatumFamily datum_family_from_string(const std::string& name)
{
    if (name == "pinched_chandrasekhar" || name == "pinched") return DatumFamily::pinched_chandrasekhar;
    if (name == "scaled_chandrasekhar" || name == "scaled") return DatumFamily::scaled_chandrasekhar;
    if (name == "compact_bump" || name == "bump") return DatumFamily::compact_bump;
    if (name == "zero") return DatumFamily::zero;
    throw std::invalid_argument("unknown datum family '" + name + "'");
}

double minimal_cap(const InitialDatumSpec& spec)
{
    const double us1 = 2.0 * (spec.n - 2);
    switch (spec.family) {
    case DatumFamily::pinched_chandrasekhar: return std::max(us1 - spec.C, 0.0);
    case DatumFamily::scaled_chandrasekhar: return spec.a * us1;
    case DatumFamily::compact_bump:
    case DatumFamily::zero: return 0.0;
    }
    return 0.0;
}

double default_cap(const InitialDatumSpec& spec) { return 2.0 * minimal_cap(spec); }

RadialDensity make_pinched(const MeshPtr& mesh, double theta, double C, double cap)
{
    if (!(theta > 0.0)) throw std::invalid_argument("make_pinched: theta must be positive");
    if (!(C > 0.0)) throw std::invalid_argument("make_pinched: C must be positive");
    const int n = mesh->dimension();
    const double needed = 2.0 * (n - 2) - C;
    if (!(cap > 0.0) || cap < needed)
        throw std::invalid_argument("make_pinched: cap too small for the tail condition at r = 1; minimal cap is " +
                                    std::to_string(std::max(needed, 0.0)));
    RadialDensity u{mesh, std::vector<double>(mesh->size(), 0.0)};
    for (std::size_t j = 1; j < mesh->size(); ++j) {
        const double r = mesh->r(j);
        const double raw = u_star(n, r) - C * std::pow(r, -2.0 - theta);
        u.values[j] = std::min(cap, std::max(0.0, raw));
    }
    // the pinched profile is negative near the origin, hence zero there
    u.values[0] = 0.0;
    return u;
}

RadialDensity make_scaled(const MeshPtr& mesh, double a, double cap)
{
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("make_scaled: a must lie in [0,1]");
    if (a > 0.0 && !(cap > 0.0)) throw std::invalid_argument("make_scaled: cap must be positive");
    const int n = mesh->dimension();
    RadialDensity u{mesh, std::vector<double>(mesh->size(), 0.0)};
    if (a == 0.0) return u;
    for (std::size_t j = 1; j < mesh->size(); ++j) u.values[j] = std::min(cap, a * u_star(n, mesh->r(j)));
    u.values[0] = cap;
    return u;
}

RadialDensity make_compact_bump(const MeshPtr& mesh, double a, double radius)
{
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("make_compact_bump: a must lie in [0,1]");
    if (!(radius > 0.0)) throw std::invalid_argument("make_compact_bump: radius must be positive");
    const int n = mesh->dimension();
    const double height = a * u_star(n, radius);
    RadialDensity u{mesh, std::vector<double>(mesh->size(), 0.0)};
    for (std::size_t j = 0; j < mesh->size(); ++j) {
        const double x = mesh->r(j) / radius;
        if (x < 1.0) u.values[j] = height * (1.0 - x * x) * (1.0 - x * x);
    }
    return u;
}

RadialDensity make_datum(const MeshPtr& mesh, const InitialDatumSpec& spec)
{
    if (spec.n != mesh->dimension()) throw std::invalid_argument("make_datum: datum and mesh dimensions differ");
    const double cap = spec.cap > 0.0 ? spec.cap : default_cap(spec);
    switch (spec.family) {
    case DatumFamily::pinched_chandrasekhar: return make_pinched(mesh, spec.theta, spec.C, cap);
    case DatumFamily::scaled_chandrasekhar: return make_scaled(mesh, spec.a, cap);
    case DatumFamily::compact_bump: return make_compact_bump(mesh, spec.a, spec.radius);
    case DatumFamily::zero: return RadialDensity{mesh, std::vector<double>(mesh->size(), 0.0)};
    }
    throw std::invalid_argument("make_datum: unknown family");
}

InitReport check_init(const RadialDensity& u0)
{
    const Mesh& mesh = *u0.mesh;
    InitReport rep;
    for (std::size_t j = 1; j < mesh.size(); ++j) {
        const double v = u0.values[j];
        const double excess = std::max(v - u_star(mesh.dimension(), mesh.r(j)), -v);
        if (excess > rep.max_violation) {
            rep.max_violation = excess;
            rep.violation_radius = mesh.r(j);
        }
    }
    rep.passes = rep.max_violation <= 0.0;
    return rep;
}

bool less_concentrated(const RadialDensity& u0, const RadialDensity& ref, double rel_tol)
{
    if (u0.mesh != ref.mesh && (u0.mesh->size() != ref.mesh->size() ||
                                !std::equal(u0.mesh->s().begin(), u0.mesh->s().end(), ref.mesh->s().begin())))
        throw std::invalid_argument("less_concentrated: densities live on different meshes");
    const auto w0 = u_to_w(u0);
    const auto w1 = u_to_w(ref);
    for (std::size_t j = 0; j < w0.values.size(); ++j) {
        if (w0.values[j] > w1.values[j] + rel_tol * std::abs(w1.values[j])) return false;
    }
    return true;
}

double alpha_of(int n, double theta)
{
    if (!(theta > 0.0) || !(theta < n - 2)) throw std::domain_error("alpha_of: need 0 < theta < n - 2");
    return (n - 2 - theta) / n;
}

double sup_growth(const DeviationField& phi0, double alpha)
{
    const Mesh& mesh = *phi0.mesh;
    double sup = 0.0;
    for (std::size_t j = mesh.lower_index(1.0); j < mesh.size(); ++j)
        sup = std::max(sup, phi0.values[j] / std::pow(mesh.s(j), alpha));
    return sup;
}

}  // namespace kslab
