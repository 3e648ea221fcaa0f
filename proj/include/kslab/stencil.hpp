#pragma once

#include <span>
#include <vector>

namespace kslab {

// Three-point finite differences on a nonuniform grid. Exact for quadratics.

/// Weights (left, centre, right) of the central first derivative at an interior node.
struct Weights3 {
    double left;
    double centre;
    double right;
};

Weights3 central_first(double h_minus, double h_plus);
Weights3 central_second(double h_minus, double h_plus);

/// Nodes and values of a three-point stencil.
struct Stencil3 {
    double x[3];
    double g[3];
};

/// Corrects weights exact on {1, x, x^2} so they become exact on {1, x, g} instead:
/// adds the multiple of the second divided difference that matches `target`,
/// the wanted derivative of g at the evaluation point.
Weights3 fit_weights(const Weights3& poly, const Stencil3& st, double target);

/// First derivative at every node; one-sided second-order stencils at both ends.
std::vector<double> first_derivative(std::span<const double> x, std::span<const double> f);

/// Second derivative at interior nodes; ends are copied from the neighbour.
std::vector<double> second_derivative(std::span<const double> x, std::span<const double> f);

/// Composite trapezoid rule.
double trapezoid(std::span<const double> x, std::span<const double> f);

}  // namespace kslab
