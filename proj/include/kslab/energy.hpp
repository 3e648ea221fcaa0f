#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "kslab/fields.hpp"
#include "kslab/solver.hpp"

namespace kslab {

/// Exponents of the weighted functional int s^{-gamma} zeta_eps^2 phi^p ds.
struct EnergyParams {
    double p = 2.0;
    double gamma = 2.0;
    double alpha = 0.0;  // far-field growth exponent of the datum, phi <= c s^alpha
    double eps = 0.0;    // cutoff scale; 0 selects the uncut functional
};

/// The five admissibility conditions, each testable on its own.
struct AdmissibilityFlags {
    bool gamma_above_floor = false;  // gamma > 1 - 2/n
    bool p_above_one = false;        // p > 1
    bool origin_layer_decay = false; // p > n gamma/(n-2) - 1
    bool tail_weight = false;        // p alpha < gamma - 1
    bool p_in_window = false;        // p_-(gamma) <= p <= p_+(gamma), 1e-12 relative slack

    bool all() const { return gamma_above_floor && p_above_one && origin_layer_decay && tail_weight && p_in_window; }
};

AdmissibilityFlags admissibility(int n, const EnergyParams& params);

/// Relative slack used for p_- <= p <= p_+; at n = 10 the window is a single point.
inline constexpr double p_window_slack = 1e-12;

/// p_pm(gamma) = n/4 (gamma - 1 + 2/n)(1 pm sqrt((n-10)/(n-2))).
/// Throws std::domain_error for n < 10 or gamma <= 1 - 2/n.
std::pair<double, double> p_bounds(int n, double gamma);

/// (n - 2 + sqrt((n-2)(n-10)))/2. Throws std::domain_error for n < 10.
double theta_threshold(int n);

/// alpha = (n-2-theta)/n, then the smallest gamma on the scan max(2, 1-2/n+0.1) + 0.5 k,
/// gamma <= 1000, for which p = p_+(gamma) passes every flag.
/// Throws std::domain_error unless theta_threshold(n) < theta < n - 2,
/// std::runtime_error if the scan runs out.
EnergyParams select_params(int n, double theta);

/// Composite trapezoid in s over nodes j >= 1 (the origin node is skipped).
double integrate_nodes(const Mesh& mesh, const std::vector<double>& f);

/// int s^{-gamma} zeta_eps^2 phi^p ds; negative phi counts as 0.
double phi_functional(const DeviationField& phi, const EnergyParams& params);

/// Time derivative of phi_eps / p next to the six integrals that should add up to it.
struct IdentityRecord {
    double t = 0.0;
    double lhs = 0.0;
    std::array<double, 6> terms{};
    double rhs_sum = 0.0;

    /// |lhs - rhs| / max(|lhs|, |rhs|, floor)
    double mismatch(double floor = 1e-300) const;
};

/// Names of the six terms, in order.
const std::array<std::string, 6>& identity_term_names();

/// The six integrals at one snapshot. Requires eps > 0.
std::array<double, 6> identity_terms(const DeviationField& phi, const EnergyParams& params);

/// lhs by the three-point derivative through the neighbouring snapshots.
/// Throws std::invalid_argument for eps <= 0 or when t is not an interior snapshot time.
IdentityRecord energy_identity(const Trajectory& traj, const EnergyParams& params, double t);

struct HardyResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// int s^{-beta} psi^2 <= 4/(beta-1)^2 int s^{2-beta} psi_s^2 on a grid, with psi_s by
/// three-point differences. Throws std::invalid_argument for beta <= 1 or size mismatch.
HardyResult hardy_check(const std::vector<double>& s, const std::vector<double>& psi, double beta);
/// Same with the derivative supplied.
HardyResult hardy_check(const std::vector<double>& s, const std::vector<double>& psi, const std::vector<double>& psi_s,
                        double beta);

/// Weighted Hardy bound for s^{-2/n-gamma} zeta_eps^2 phi^p with the three-term right side.
/// Requires eps > 0.
HardyResult weighted_hardy_bound(const DeviationField& phi, const EnergyParams& params);

/// Running value of int_0^t int s^{-gamma-1} phi^{p+1} ds dt at every snapshot (trapezoid in t).
std::vector<double> dissipation_integral(const Trajectory& traj, const EnergyParams& params);

/// (p+1)/(n gamma p) int s^{-gamma} phi^p(s, 0) ds, the bound on the total dissipation.
double dissipation_bound(const DeviationField& phi0, const EnergyParams& params);

/// Space-time integrals over the two layers where zeta_eps' != 0.
struct CutoffLayerRow {
    double eps = 0.0;
    std::array<double, 7> values{};
};

const std::array<std::string, 7>& cutoff_layer_names();

struct CutoffDecayTable {
    std::vector<CutoffLayerRow> rows;
    double origin_exponent = 0.0;  // 1 - 2/n - gamma + (1 - 2/n) p, first four columns
    double tail_exponent = 0.0;    // -1 + 2/n + gamma - p alpha, last three

    /// Least-squares slope of log value against log eps for one column, over rows with value > 0.
    double measured_slope(std::size_t column) const;
    double analytic_exponent(std::size_t column) const { return column < 4 ? origin_exponent : tail_exponent; }
    /// Smallest ratio value(eps) / value(eps/2) over consecutive rows.
    double min_halving_factor(std::size_t column) const;
};

/// Integrates the seven layer integrals over the snapshots with t <= T.
/// eps values must lie in (0,1).
CutoffDecayTable cutoff_error_decay(const Trajectory& traj, const EnergyParams& params, const std::vector<double>& eps,
                                    double T);

void write_identity_csv(std::ostream& out, const std::vector<IdentityRecord>& records);

}  // namespace kslab
