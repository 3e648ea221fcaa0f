#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kslab/mesh.hpp"

namespace kslab {

/// Chandrasekhar steady state in mass variables, 2 s^{1-2/n}.
double w_star(int n, double s);

/// Chandrasekhar steady state 2(n-2)/r^2. Throws std::domain_error at r <= 0.
double u_star(int n, double r);

/// Samples of the cell density u(r) on the r-grid of a mesh.
struct RadialDensity {
    MeshPtr mesh;
    std::vector<double> values;

    int dimension() const { return mesh->dimension(); }
};

/// Cumulated radial mass w(s, t) on the s-grid.
struct MassFunction {
    MeshPtr mesh;
    std::vector<double> values;
    double t = 0.0;

    int dimension() const { return mesh->dimension(); }
};

/// Deviation phi = w_star - w from the singular steady state.
struct DeviationField {
    MeshPtr mesh;
    std::vector<double> values;
    double t = 0.0;

    int dimension() const { return mesh->dimension(); }
};

/// Samples u_star on the mesh; the origin node holds u_star at the first
/// positive radius (the origin never enters the mass integral).
RadialDensity sample_u_star(const MeshPtr& mesh);

/// w_star sampled on the mesh.
MassFunction sample_w_star(const MeshPtr& mesh, double t = 0.0);

/// w_j = integral_0^{r_j} rho^{n-1} u d rho with u linear in rho on each interval and the
/// weight integrated exactly (8-point Gauss); second order, exact on u = u_star.
/// Throws std::invalid_argument on negative or non-finite density samples.
MassFunction u_to_w(const RadialDensity& u, double t = 0.0);

/// u = n w_s with three-point differences in s. Negative values down to
/// -1e-12 max|u| are rounding noise and clamped to zero; anything below stays visible.
RadialDensity w_to_u(const MassFunction& w);

/// Relative clamp threshold used by w_to_u.
inline constexpr double negative_clamp_fraction = 1e-12;

/// Largest violation of 0 <= phi <= w_star, in absolute units (0 if none).
struct DeviationBounds {
    double below_zero = 0.0;
    double above_w_star = 0.0;
    bool holds() const { return below_zero == 0.0 && above_w_star == 0.0; }
};

DeviationField deviation(const MassFunction& w);
MassFunction mass_from_deviation(const DeviationField& phi);
DeviationBounds check_deviation_bounds(const DeviationField& phi);

/// Radial gradient of the chemoattractant, v_r = -w(r^n) / r^{n-1}, at nodes 1..N.
std::vector<double> v_gradient(const MassFunction& w);

// CSV with header "s,r,value,t" and a JSON description of the mesh.
void write_csv(std::ostream& out, const MassFunction& w);
void write_csv(std::ostream& out, const DeviationField& phi);
void write_csv(std::ostream& out, const RadialDensity& u, double t = 0.0);
std::string mesh_summary_json(const Mesh& mesh);

}  // namespace kslab
