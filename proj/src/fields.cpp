#include "kslab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "kslab/stencil.hpp"

namespace kslab {

double w_star(int n, double s)
{
    if (s <= 0.0) return 0.0;
    return 2.0 * std::pow(s, 1.0 - 2.0 / n);
}

double u_star(int n, double r)
{
    if (!(r > 0.0)) throw std::domain_error("u_star is singular at r = 0");
    return 2.0 * (n - 2) / (r * r);
}

RadialDensity sample_u_star(const MeshPtr& mesh)
{
    RadialDensity u{mesh, std::vector<double>(mesh->size())};
    const int n = mesh->dimension();
    for (std::size_t j = 1; j < mesh->size(); ++j) u.values[j] = u_star(n, mesh->r(j));
    u.values[0] = u.values[1];
    return u;
}

MassFunction sample_w_star(const MeshPtr& mesh, double t)
{
    MassFunction w{mesh, std::vector<double>(mesh->size()), t};
    const int n = mesh->dimension();
    for (std::size_t j = 0; j < mesh->size(); ++j) w.values[j] = w_star(n, mesh->s(j));
    return w;
}

namespace {

// int_a^b rho^{n-1} (fa (b - rho) + fb (rho - a)) / (b - a) d rho, 8-point Gauss-Legendre
// (exact for n <= 15).
double product_rule(int n, double a, double b, double fa, double fb)
{
    static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static constexpr double wt[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const double h = b - a, mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        for (double sign : {-1.0, 1.0}) {
            const double rho = mid + sign * 0.5 * h * x[k];
            const double lam = (rho - a) / h;
            sum += wt[k] * std::pow(rho, n - 1) * ((1.0 - lam) * fa + lam * fb);
        }
    }
    return 0.5 * h * sum;
}

}  // namespace

MassFunction u_to_w(const RadialDensity& u, double t)
{
    const Mesh& mesh = *u.mesh;
    if (u.values.size() != mesh.size()) throw std::invalid_argument("u_to_w: density does not match mesh");
    for (double v : u.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("u_to_w: non-finite density sample");
        if (v < 0.0) throw std::invalid_argument("u_to_w: negative density sample");
    }
    const int n = mesh.dimension();
    MassFunction w{u.mesh, std::vector<double>(mesh.size(), 0.0), t};
    // u is interpolated linearly in rho on each interval and rho^{n-1} u integrated exactly.
    // Where u is close to u_star the deficit u_star - u is interpolated instead and the
    // exact u_star mass added back, so u = u_star maps to w_star.
    auto near_star = [&](std::size_t j) { return j > 0 && u.values[j] >= 0.5 * u_star(n, mesh.r(j)); };
    auto deficit = [&](std::size_t j) { return u_star(n, mesh.r(j)) - u.values[j]; };
    for (std::size_t j = 1; j < mesh.size(); ++j) {
        const double a = mesh.r(j - 1), b = mesh.r(j);
        double inc;
        if (near_star(j) && j == 1) {
            // u / u_star taken constant on the first interval
            inc = u.values[1] / u_star(n, b) * w_star(n, mesh.s(1));
        }
        else if (near_star(j) && near_star(j - 1)) {
            const double exact = w_star(n, mesh.s(j)) - w_star(n, mesh.s(j - 1));
            inc = exact - product_rule(n, a, b, deficit(j - 1), deficit(j));
        }
        else {
            inc = product_rule(n, a, b, u.values[j - 1], u.values[j]);
        }
        w.values[j] = w.values[j - 1] + inc;
    }
    return w;
}

RadialDensity w_to_u(const MassFunction& w)
{
    const Mesh& mesh = *w.mesh;
    const int n = mesh.dimension();
    auto du = first_derivative(mesh.s(), w.values);
    double scale = 0.0;
    for (double& v : du) {
        v *= n;
        scale = std::max(scale, std::abs(v));
    }
    const double floor = -negative_clamp_fraction * scale;
    for (double& v : du) {
        if (v < 0.0 && v >= floor) v = 0.0;
    }
    return RadialDensity{w.mesh, std::move(du)};
}

DeviationField deviation(const MassFunction& w)
{
    const Mesh& mesh = *w.mesh;
    DeviationField phi{w.mesh, std::vector<double>(mesh.size()), w.t};
    for (std::size_t j = 0; j < mesh.size(); ++j) phi.values[j] = w_star(mesh.dimension(), mesh.s(j)) - w.values[j];
    return phi;
}

MassFunction mass_from_deviation(const DeviationField& phi)
{
    const Mesh& mesh = *phi.mesh;
    MassFunction w{phi.mesh, std::vector<double>(mesh.size()), phi.t};
    for (std::size_t j = 0; j < mesh.size(); ++j) w.values[j] = w_star(mesh.dimension(), mesh.s(j)) - phi.values[j];
    return w;
}

DeviationBounds check_deviation_bounds(const DeviationField& phi)
{
    const Mesh& mesh = *phi.mesh;
    DeviationBounds b;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        const double ws = w_star(mesh.dimension(), mesh.s(j));
        b.below_zero = std::max(b.below_zero, -phi.values[j]);
        b.above_w_star = std::max(b.above_w_star, phi.values[j] - ws);
    }
    return b;
}

std::vector<double> v_gradient(const MassFunction& w)
{
    const Mesh& mesh = *w.mesh;
    std::vector<double> vr(mesh.size() - 1);
    for (std::size_t j = 1; j < mesh.size(); ++j)
        vr[j - 1] = -w.values[j] / std::pow(mesh.r(j), mesh.dimension() - 1);
    return vr;
}

namespace {

void write_rows(std::ostream& out, const Mesh& mesh, const std::vector<double>& values, double t)
{
    out << "s,r,value,t\n" << std::setprecision(17);
    for (std::size_t j = 0; j < mesh.size(); ++j)
        out << mesh.s(j) << ',' << mesh.r(j) << ',' << values[j] << ',' << t << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const MassFunction& w) { write_rows(out, *w.mesh, w.values, w.t); }
void write_csv(std::ostream& out, const DeviationField& phi) { write_rows(out, *phi.mesh, phi.values, phi.t); }
void write_csv(std::ostream& out, const RadialDensity& u, double t) { write_rows(out, *u.mesh, u.values, t); }

std::string mesh_summary_json(const Mesh& mesh)
{
    nlohmann::json j;
    j["n"] = mesh.dimension();
    j["N"] = mesh.intervals();
    j["S_max"] = mesh.s_max();
    j["grading"] = to_string(mesh.grading());
    return j.dump();
}

}  // namespace kslab
