#pragma once

#include <string>

#include "kslab/fields.hpp"

namespace kslab {

enum class DatumFamily { pinched_chandrasekhar, scaled_chandrasekhar, compact_bump, zero };

std::string to_string(DatumFamily f);
DatumFamily datum_family_from_string(const std::string& name);

/// Parameters of one admissible initial density.
///
/// `cap <= 0` means "use the family default", twice the smallest admissible cap.
struct InitialDatumSpec {
    int n = 10;
    DatumFamily family = DatumFamily::pinched_chandrasekhar;
    double theta = 5.0;   // tail exponent (pinched)
    double C = 1.0;       // tail amplitude (pinched)
    double a = 1.0;       // amplitude fraction (scaled, bump)
    double radius = 1.0;  // support radius (bump)
    double cap = 0.0;     // inner regularization M0
};

/// Smallest cap for which the family datum satisfies its defining bound at r = 1.
double minimal_cap(const InitialDatumSpec& spec);
double default_cap(const InitialDatumSpec& spec);

/// min(cap, max(0, u_star(r) - C r^{-2-theta})). Throws std::invalid_argument
/// if cap < u_star(1) - C, naming that value.
RadialDensity make_pinched(const MeshPtr& mesh, double theta, double C, double cap);

/// min(cap, a u_star(r)), a in [0,1].
RadialDensity make_scaled(const MeshPtr& mesh, double a, double cap);

/// a u_star(R) (1 - (r/R)^2)^2 on [0,R], zero outside.
RadialDensity make_compact_bump(const MeshPtr& mesh, double a, double radius);

RadialDensity make_datum(const MeshPtr& mesh, const InitialDatumSpec& spec);

/// Pointwise check of 0 <= u0 <= u_star at all nodes r > 0.
struct InitReport {
    bool passes = true;
    double max_violation = 0.0;  // largest u0 - u_star (or -u0), absolute units
    double violation_radius = 0.0;
};
InitReport check_init(const RadialDensity& u0);

/// True iff the cumulated mass of u0 never exceeds that of ref.
/// Throws std::invalid_argument if the meshes differ.
bool less_concentrated(const RadialDensity& u0, const RadialDensity& ref, double rel_tol = 0.0);

/// (n - 2 - theta)/n; throws std::domain_error unless 0 < theta < n - 2.
double alpha_of(int n, double theta);

/// sup over nodes s >= 1 of phi(s)/s^alpha.
double sup_growth(const DeviationField& phi0, double alpha);

}  // namespace kslab
