#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/solver.hpp"

namespace kslab {

enum class BarrierKind { growth_supersolution, oscillating_subsolution, mass_barrier };
enum class EquationForm { form_0w, form_0p };

std::string to_string(BarrierKind k);
std::string to_string(EquationForm f);

/// Value, first and second s-derivative and t-derivative at one point.
struct BarrierJet {
    double value = 0.0;
    double ds = 0.0;
    double dss = 0.0;
    double dt = 0.0;
};

/// Closed rectangle of (s, t); infinite ends are allowed.
struct ValidityRegion {
    double s_lo, s_hi, t_lo, t_hi;
    bool contains(double s, double t) const { return s >= s_lo && s <= s_hi && t >= t_lo && t <= t_hi; }
};

/// An immutable candidate comparison function with analytic derivatives.
class BarrierCertificate {
public:
    BarrierCertificate(BarrierKind kind, int n, ValidityRegion region, std::function<BarrierJet(double, double)> eval,
                       std::string params_json)
        : kind_(kind), n_(n), region_(region), eval_(std::move(eval)), params_(std::move(params_json))
    {
    }

    BarrierKind kind() const { return kind_; }
    int dimension() const { return n_; }
    const ValidityRegion& region() const { return region_; }
    /// Throws std::out_of_range outside the validity region.
    BarrierJet evaluate(double s, double t) const;
    double value(double s, double t) const { return evaluate(s, t).value; }
    const std::string& params_json() const { return params_; }

    /// The equation the certificate is built for and the sign its residual must carry there (+1 or -1).
    EquationForm native_form() const;
    int prescribed_sign(EquationForm form) const;

private:
    BarrierKind kind_;
    int n_;
    ValidityRegion region_;
    std::function<BarrierJet(double, double)> eval_;
    std::string params_;
};

// -- growth supersolution c2 e^{lambda t} s^alpha of the deviation equation on s >= 1

/// lambda = 2 n alpha + 2(n-2), c2 = max{c1_fit, 2}. Throws std::domain_error unless 0 < alpha < 1 - 2/n.
BarrierCertificate growth_supersolution(int n, double alpha, double c1_fit);
double growth_rate(int n, double alpha);

// -- oscillating subsolution y(t) s^mu cos(omega ln s) for 3 <= n <= 9

struct OscillationParams {
    int n = 0;
    double s0 = 0.0;
    double omega = 0.0;
    double mu = 0.0;
    int k0 = 0;
    double s1 = 0.0, s_star = 0.0, s2 = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double c4 = 0.0;  // set from a run, 0 until measured

    std::string to_json() const;
};

/// omega = omega_fraction * sqrt((n-2)(10-n))/(2n); k0 the smallest integer with s1 > s0.
/// Throws std::domain_error for n outside [3,9], std::invalid_argument for bad fraction or s0.
OscillationParams oscillation_params(int n, double s0, double omega_fraction = 0.9);
/// Same with omega given directly; requires omega^2 < (n-2)(10-n)/(4n^2).
OscillationParams oscillation_params_with_omega(int n, double s0, double omega);

/// Closed-form logistic solution of y' = (c1/c2) y - (c3/c2) y^2, y(1) = y0.
double bernoulli_y(double c1, double c2, double c3, double y0, double t);

/// y(t) s^mu cos(omega ln s) on [s1,s2] x [1,inf). y0 defaults to c4 s2^{-mu};
/// it is capped at c1/c3, above which y decreases and the sign argument fails.
BarrierCertificate oscillating_subsolution(const OscillationParams& p, std::optional<double> y0 = std::nullopt);

// -- mass barrier 2s/(s^{2/n} + b(t)) of the mass equation on [0, s_star]

struct MassBarrierParams {
    int n = 0;
    double B = 0.0;
    double b0 = 0.0;
    double s_star = 0.0;
    double t0 = 0.0;  // time at which b = b0

    std::string to_json() const;
};

/// Relaxation rate of b towards 2B, 2/(s_star^{2/n} + 2B).
double b_relaxation_rate(const MassBarrierParams& p);

/// b(t) from b' = 2b/(s_star^{2/n}+b) (2B-b)/(2B), b(t0) = b0, by the classical
/// four-stage method with step 1e-3 / rate. Throws std::invalid_argument unless 0 < b0 < 2B.
double b_solve(const MassBarrierParams& p, double t);
double b_rhs(const MassBarrierParams& p, double b);

BarrierCertificate mass_barrier(const MassBarrierParams& p, double t_end);

// -- residual certification

struct ResidualField {
    EquationForm form = EquationForm::form_0p;
    std::vector<double> s, t;
    std::vector<double> values;  // t-major: values[i * s.size() + k]
    std::vector<double> scales;  // sum of absolute term sizes at each point
    double min = 0.0;
    double max = 0.0;
    int prescribed_sign = 0;
    double worst_relative_violation = 0.0;  // max over points of wrong-sign residual / scale

    bool certified(double rel_tol) const { return worst_relative_violation <= rel_tol; }
};

/// N[candidate] = candidate_t - (right-hand side). A certificate for the other
/// form is translated through w = w_star - phi. Throws std::out_of_range off-region.
ResidualField residual(const BarrierCertificate& cert, EquationForm form, const std::vector<double>& s,
                       const std::vector<double>& t);

/// Interior grid of ns x nt points on [s_lo,s_hi] x [t_lo,t_hi]; geometric in s when s_hi/s_lo > 10.
std::pair<std::vector<double>, std::vector<double>> certification_grid(double s_lo, double s_hi, double t_lo,
                                                                       double t_hi, std::size_t ns = 200,
                                                                       std::size_t nt = 200);

std::string residual_report_json(const BarrierCertificate& cert, const ResidualField& field);

// -- absorbing constant

struct AbsorbingConstant {
    double c1 = 0.0;
    double c2 = 0.0;
    double C = 0.0;        // bound on w_s
    double u_bound = 0.0;  // n C, the corresponding bound on u
};

/// Uses K = k_chi() unless given. Throws std::domain_error for n outside [3,9] or B <= 0.
AbsorbingConstant absorbing_constant(int n, double B, std::optional<double> K = std::nullopt);

// -- a-posteriori ordering against a simulated trajectory

struct SubsolutionCheck {
    OscillationParams params;  // with c4 measured at t = 1
    double y0 = 0.0;
    std::optional<double> t0;   // first time y >= c1/(2 c3)
    double floor_at_s_star = 0.0;  // c1 s_star^mu / (2 c3)
    double worst_violation = 0.0;  // max of (subsolution - phi) over nodes in [s1,s2], snapshots t >= 1
    std::size_t checked_points = 0;
    bool holds = false;
};

/// Needs a snapshot at t = 1 and nodes in [s1,s2]. Violations are measured relative to w_star(s).
SubsolutionCheck check_subsolution_order(const Trajectory& traj, const OscillationParams& params, double rel_tol = 1e-6);

struct MassBarrierCheck {
    MassBarrierParams params;
    std::optional<double> t1;  // first time b >= B
    double worst_violation = 0.0;  // max of (w - barrier)/w_star over [0,s_star], t >= t0
    double final_violation = 0.0;  // max of (w - 2s/(s^{2/n}+B))/w_star over [0,s0], t >= t1
    std::size_t checked_points = 0;
    bool holds = false;
    std::string note;
};

/// Instantiates B, t0, b0 from the run as the construction prescribes and checks both orderings.
MassBarrierCheck check_mass_barrier_order(const Trajectory& traj, const SubsolutionCheck& sub, double s0,
                                          double rel_tol = 1e-6);

}  // namespace kslab
