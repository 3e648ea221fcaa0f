#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kslab/fields.hpp"

namespace kslab {

enum class Formulation { w_form, phi_form };

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& name);

/// Three-point weights: plain polynomial ones (exact on quadratics), or balanced
/// ones that are exact on 1, s and s^{1-2/n}, so that w_star is a discrete steady state.
enum class StencilKind { polynomial, balanced };

std::string to_string(StencilKind k);
StencilKind stencil_from_string(const std::string& name);

/// Treatment of the transport term n w w_s. `implicit` linearises it about the old
/// state (n w^k D w^{k+1}, central weights) and solves it with the diffusion; no CFL
/// limit applies. `explicit_upwind` keeps it explicit with second-order one-sided weights.
enum class Transport { implicit, explicit_upwind };

std::string to_string(Transport t);
Transport transport_from_string(const std::string& name);

/// Only one far-field policy exists: the value at S_max stays at its initial value.
enum class OuterBoundary { dirichlet_frozen };

/// Switches for the individual terms of the deviation equation (test mode).
struct PhiTerms {
    bool diffusion = true;  // n^2 s^{2-2/n} phi_ss
    bool drift = true;      // 2n s^{1-2/n} phi_s
    bool reaction = true;   // 2(n-2) s^{-2/n} phi
    bool transport = true;  // -n phi phi_s
};

/// Extra source term f(s, t) added to the right-hand side (manufactured solutions).
using Forcing = std::function<double(double s, double t)>;

struct SolverConfig {
    Formulation formulation = Formulation::w_form;
    StencilKind stencil = StencilKind::balanced;
    Transport transport = Transport::implicit;
    double dt_init = 1e-4;
    double dt_max = 0.05;
    double safety = 0.5;             // CFL safety factor in (0,1]
    double accuracy_tol = 1e-5;      // local error bound, max |dw|/w_star, by step doubling
    double invariant_tol = 1e-6;     // relative to w_star(S_max)
    double overflow_guard = 1e100;
    OuterBoundary outer_bc = OuterBoundary::dirichlet_frozen;
    std::vector<double> output_times;  // if empty, output_count equispaced times in (0, t_end]
    std::size_t output_count = 50;
    std::size_t max_steps = 100'000'000;
    PhiTerms phi_terms;
    Forcing forcing;
};

/// Thrown on a failed tridiagonal solve or non-finite values; carries the offending state.
class StepError : public std::runtime_error {
public:
    StepError(const std::string& what, double t, double dt, std::vector<double> state)
        : std::runtime_error(what), t(t), dt(dt), state(std::move(state))
    {
    }
    double t;
    double dt;
    std::vector<double> state;
};

/// Discrete right-hand side n^2 s^{2-2/n} D2 w + n w D1 w at interior nodes (central
/// weights of the given kind); zero at both ends.
std::vector<double> spatial_operator_w(const MassFunction& w, StencilKind kind = StencilKind::balanced);

/// One Euler step of w_t = n^2 s^{2-2/n} w_ss + n w w_s, diffusion implicit,
/// transport as selected. w(0) = 0, w(S_max) unchanged.
MassFunction step_w(const MassFunction& w, double dt, const Forcing& forcing = {},
                    StencilKind kind = StencilKind::balanced, Transport transport = Transport::implicit);

/// One Euler step of the deviation equation.
/// With all four terms on, drift and transport are merged into n (w_star - phi) phi_s and
/// treated like the w-form transport, the reaction is explicit, and the step is the image
/// of step_w under phi = w_star - w. With terms switched off individually, diffusion,
/// drift and reaction are implicit and -n phi phi_s explicit, left-biased.
/// phi(0) = 0, phi(S_max) unchanged.
DeviationField step_phi(const DeviationField& phi, double dt, const PhiTerms& terms = {},
                        const Forcing& forcing = {}, StencilKind kind = StencilKind::balanced,
                        Transport transport = Transport::implicit);

/// safety * min_j (s_{j+1} - s_j) / (n |v_j| + tiny), v the transported field.
double cfl_limit(const Mesh& mesh, const std::vector<double>& v, double safety);

/// Largest violations seen during a run, absolute and relative to w_star(S_max).
struct InvariantReport {
    double below_zero = 0.0;      // max of -w
    double above_w_star = 0.0;    // max of w - w_star
    double monotonicity = 0.0;    // max of w_j - w_{j+1}
    double local_relative = 0.0;  // max over j >= 1 of the three violations divided by w_star(s_j)
    double scale = 1.0;           // w_star(S_max)
    double worst() const;
    bool holds(double tol) const { return worst() <= tol * scale; }
};

struct DtStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
    double dt_mean = 0.0;
};

struct Trajectory {
    std::vector<MassFunction> snapshots;  // strictly increasing t, snapshot 0 at t = 0
    bool exploded = false;
    double explosion_time = 0.0;
    std::string status = "ok";
    DtStats dt_stats;
    InvariantReport invariants;

    std::vector<double> times() const;
    const MassFunction& final() const { return snapshots.back(); }
};

using Observer = std::function<void(const MassFunction&)>;

/// Adaptive integration to t_end; observers are called with every stored snapshot.
Trajectory run(const RadialDensity& u0, const SolverConfig& cfg, double t_end,
               const std::vector<Observer>& observers = {});
Trajectory run_from(const MassFunction& w0, const SolverConfig& cfg, double t_end,
                    const std::vector<Observer>& observers = {});

/// Output times implied by cfg for a run to t_end, starting with 0.
std::vector<double> resolve_output_times(const SolverConfig& cfg, double t_end);

/// Config echo, dt statistics and invariant maxima.
std::string manifest_json(const Trajectory& traj, const SolverConfig& cfg);

}  // namespace kslab
