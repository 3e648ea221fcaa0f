#include "kslab/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "kslab/stencil.hpp"
#include "kslab/tridiagonal.hpp"

namespace kslab {

std::string to_string(Formulation f) { return f == Formulation::w_form ? "w_form" : "phi_form"; }

std::string to_string(StencilKind k) { return k == StencilKind::balanced ? "balanced" : "polynomial"; }

StencilKind stencil_from_string(const std::string& name)
{
    if (name == "balanced") return StencilKind::balanced;
    if (name == "polynomial") return StencilKind::polynomial;
    throw std::invalid_argument("unknown stencil kind '" + name + "'");
}

Formulation formulation_from_string(const std::string& name)
{
    if (name == "w_form" || name == "w") return Formulation::w_form;
    if (name == "phi_form" || name == "phi") return Formulation::phi_form;
    throw std::invalid_argument("unknown formulation '" + name + "'");
}

std::string to_string(Transport t) { return t == Transport::implicit ? "implicit" : "explicit_upwind"; }

Transport transport_from_string(const std::string& name)
{
    if (name == "implicit") return Transport::implicit;
    if (name == "explicit_upwind" || name == "explicit") return Transport::explicit_upwind;
    throw std::invalid_argument("unknown transport treatment '" + name + "'");
}

double InvariantReport::worst() const { return std::max({below_zero, above_w_star, monotonicity}); }

std::vector<double> Trajectory::times() const
{
    std::vector<double> t;
    t.reserve(snapshots.size());
    for (const auto& w : snapshots) t.push_back(w.t);
    return t;
}

namespace {

constexpr double tiny = 1e-300;

// Mesh-dependent coefficients, computed once per run.
struct Operator {
    Operator(const Mesh& mesh, StencilKind kind) : n(mesh.dimension()), N(mesh.intervals())
    {
        const auto s = mesh.s();
        kappa.assign(N + 1, 0.0);
        drift.assign(N + 1, 0.0);
        react.assign(N + 1, 0.0);
        wstar.assign(N + 1, 0.0);
        d1.assign(N + 1, {0.0, 0.0, 0.0});
        d2.assign(N + 1, {0.0, 0.0, 0.0});
        right.assign(N + 1, {0.0, 0.0, 0.0});
        left.assign(N + 1, {0.0, 0.0, 0.0});
        ds.assign(N, 0.0);
        for (std::size_t j = 0; j < N; ++j) ds[j] = s[j + 1] - s[j];
        for (std::size_t j = 1; j <= N; ++j) {
            kappa[j] = n * n * std::pow(s[j], 2.0 - 2.0 / n);
            drift[j] = 2.0 * n * std::pow(s[j], 1.0 - 2.0 / n);
            react[j] = 2.0 * (n - 2) * std::pow(s[j], -2.0 / n);
            wstar[j] = w_star(n, s[j]);
        }
        for (std::size_t j = 1; j < N; ++j) {
            const double hm = s[j] - s[j - 1], hp = s[j + 1] - s[j];
            d1[j] = central_first(hm, hp);
            d2[j] = central_second(hm, hp);
            if (j + 2 <= N) {
                const double h1 = hp, h2 = s[j + 2] - s[j + 1], H = h1 + h2;
                right[j] = {-(2.0 * h1 + h2) / (h1 * H), H / (h1 * h2), -h1 / (h2 * H)};
            }
            if (j >= 2) {
                const double h1 = hm, h2 = s[j - 1] - s[j - 2], H = h1 + h2;
                left[j] = {(2.0 * h1 + h2) / (h1 * H), -H / (h1 * h2), h1 / (h2 * H)};
            }
            if (kind == StencilKind::balanced) balance(s, j);
        }
    }

    // Make every stencil at node j exact on s^{1-2/n} as well, so that w_star is a
    // discrete equilibrium.
    void balance(std::span<const double> s, std::size_t j)
    {
        const double e = 1.0 - 2.0 / n;
        auto g = [e](double x) { return x > 0.0 ? std::pow(x, e) : 0.0; };
        const double g1 = e * std::pow(s[j], e - 1.0);
        const double g2 = e * (e - 1.0) * std::pow(s[j], e - 2.0);
        const Stencil3 c{{s[j - 1], s[j], s[j + 1]}, {g(s[j - 1]), g(s[j]), g(s[j + 1])}};
        d1[j] = fit_weights(d1[j], c, g1);
        d2[j] = fit_weights(d2[j], c, g2);
        if (j + 2 <= N) {
            const Stencil3 r{{s[j], s[j + 1], s[j + 2]}, {g(s[j]), g(s[j + 1]), g(s[j + 2])}};
            const auto w = fit_weights({right[j][0], right[j][1], right[j][2]}, r, g1);
            right[j] = {w.left, w.centre, w.right};
        }
        if (j >= 2) {
            const Stencil3 l{{s[j - 2], s[j - 1], s[j]}, {g(s[j - 2]), g(s[j - 1]), g(s[j])}};
            const auto w = fit_weights({left[j][2], left[j][1], left[j][0]}, l, g1);
            left[j] = {w.right, w.centre, w.left};
        }
    }

    // right-biased derivative at interior j, central where the stencil would leave the mesh
    double d_right(const std::vector<double>& f, std::size_t j) const
    {
        if (j + 2 <= N) return right[j][0] * f[j] + right[j][1] * f[j + 1] + right[j][2] * f[j + 2];
        return d1[j].left * f[j - 1] + d1[j].centre * f[j] + d1[j].right * f[j + 1];
    }

    double d_left(const std::vector<double>& f, std::size_t j) const
    {
        if (j >= 2) return left[j][0] * f[j] + left[j][1] * f[j - 1] + left[j][2] * f[j - 2];
        return d1[j].left * f[j - 1] + d1[j].centre * f[j] + d1[j].right * f[j + 1];
    }

    void step_w(const std::vector<double>& w, double t, double dt, const Forcing& forcing, const Mesh& mesh,
                Transport transport, std::vector<double>& out) const
    {
        std::vector<double> lo(N + 1, 0.0), di(N + 1, 1.0), up(N + 1, 0.0);
        out.assign(N + 1, 0.0);
        const bool implicit = transport == Transport::implicit;
        for (std::size_t j = 1; j < N; ++j) {
            const double k = dt * kappa[j];
            const double v = implicit ? dt * n * w[j] : 0.0;
            lo[j] = -k * d2[j].left - v * d1[j].left;
            di[j] = 1.0 - k * d2[j].centre - v * d1[j].centre;
            up[j] = -k * d2[j].right - v * d1[j].right;
            double rhs = w[j];
            if (!implicit) rhs += dt * n * w[j] * d_right(w, j);
            if (forcing) rhs += dt * forcing(mesh.s(j), t + dt);
            out[j] = rhs;
        }
        out[0] = 0.0;
        out[N] = w[N];
        finish(lo, di, up, out, t, dt, w);
    }

    void step_phi(const std::vector<double>& phi, double t, double dt, const PhiTerms& terms, const Forcing& forcing,
                  const Mesh& mesh, Transport transport, std::vector<double>& out) const
    {
        std::vector<double> lo(N + 1, 0.0), di(N + 1, 1.0), up(N + 1, 0.0);
        out.assign(N + 1, 0.0);
        // drift + transport = n (w_star - phi) phi_s = n w phi_s: explicit with the
        // w-form wind, otherwise the transport speed n phi ~ n w_star near the origin
        // would dictate the step. The reaction then goes explicit too: implicit, its
        // splitting error dt 2(n-2) s^{-2/n} dw swamps w near the origin. The step is
        // then the image of step_w under phi = w_star - w.
        const bool combined = terms.drift && terms.transport;
        const bool implicit = combined && transport == Transport::implicit;
        for (std::size_t j = 1; j < N; ++j) {
            double a = 0.0, b = 0.0, c = 0.0;
            if (implicit) {
                const double v = n * (wstar[j] - phi[j]);
                a += v * d1[j].left;
                b += v * d1[j].centre;
                c += v * d1[j].right;
            }
            if (terms.diffusion) {
                a += kappa[j] * d2[j].left;
                b += kappa[j] * d2[j].centre;
                c += kappa[j] * d2[j].right;
            }
            if (terms.drift && !combined) {
                a += drift[j] * d1[j].left;
                b += drift[j] * d1[j].centre;
                c += drift[j] * d1[j].right;
            }
            if (terms.reaction && !combined) b += react[j];
            lo[j] = -dt * a;
            di[j] = 1.0 - dt * b;
            up[j] = -dt * c;
            double rhs = phi[j];
            if (combined) {
                if (!implicit) rhs += dt * n * (wstar[j] - phi[j]) * d_right(phi, j);
                if (terms.reaction) rhs += dt * react[j] * phi[j];
            }
            else if (terms.transport)
                rhs -= dt * n * phi[j] * d_left(phi, j);
            if (forcing) rhs += dt * forcing(mesh.s(j), t + dt);
            out[j] = rhs;
        }
        out[0] = 0.0;
        out[N] = phi[N];
        finish(lo, di, up, out, t, dt, phi);
    }

    static void finish(const std::vector<double>& lo, const std::vector<double>& di, const std::vector<double>& up,
                       std::vector<double>& out, double t, double dt, const std::vector<double>& prev)
    {
        for (double v : out) {
            if (!std::isfinite(v)) throw StepError("non-finite explicit update", t, dt, prev);
        }
        if (!solve_tridiagonal(lo, di, up, out)) throw StepError("tridiagonal solve failed", t, dt, prev);
    }

    int n;
    std::size_t N;
    std::vector<double> kappa, drift, react, wstar, ds;
    std::vector<Weights3> d1, d2;
    std::vector<std::array<double, 3>> right, left;
};

void track_invariants(const Operator& op, const std::vector<double>& w, InvariantReport& rep)
{
    for (std::size_t j = 0; j <= op.N; ++j) {
        const double below = -w[j];
        const double above = w[j] - op.wstar[j];
        const double mono = j < op.N ? w[j] - w[j + 1] : 0.0;
        rep.below_zero = std::max(rep.below_zero, below);
        rep.above_w_star = std::max(rep.above_w_star, above);
        rep.monotonicity = std::max(rep.monotonicity, mono);
        if (j >= 1) {
            const double worst = std::max({below, above, mono});
            if (worst > 0.0) rep.local_relative = std::max(rep.local_relative, worst / op.wstar[j]);
        }
    }
}

}  // namespace

std::vector<double> spatial_operator_w(const MassFunction& w, StencilKind kind)
{
    const Operator op(*w.mesh, kind);
    const std::size_t N = w.mesh->intervals();
    std::vector<double> out(N + 1, 0.0);
    const auto& f = w.values;
    for (std::size_t j = 1; j < N; ++j) {
        const double fss = op.d2[j].left * f[j - 1] + op.d2[j].centre * f[j] + op.d2[j].right * f[j + 1];
        const double fs = op.d1[j].left * f[j - 1] + op.d1[j].centre * f[j] + op.d1[j].right * f[j + 1];
        out[j] = op.kappa[j] * fss + op.n * f[j] * fs;
    }
    return out;
}

MassFunction step_w(const MassFunction& w, double dt, const Forcing& forcing, StencilKind kind, Transport transport)
{
    const Operator op(*w.mesh, kind);
    MassFunction out{w.mesh, {}, w.t + dt};
    op.step_w(w.values, w.t, dt, forcing, *w.mesh, transport, out.values);
    return out;
}

DeviationField step_phi(const DeviationField& phi, double dt, const PhiTerms& terms, const Forcing& forcing,
                        StencilKind kind, Transport transport)
{
    const Operator op(*phi.mesh, kind);
    DeviationField out{phi.mesh, {}, phi.t + dt};
    op.step_phi(phi.values, phi.t, dt, terms, forcing, *phi.mesh, transport, out.values);
    return out;
}

double cfl_limit(const Mesh& mesh, const std::vector<double>& v, double safety)
{
    double limit = std::numeric_limits<double>::infinity();
    const int n = mesh.dimension();
    for (std::size_t j = 0; j + 1 < mesh.size(); ++j) {
        const double speed = n * std::abs(v[j]);
        if (speed > 0.0) limit = std::min(limit, (mesh.s(j + 1) - mesh.s(j)) / (speed + tiny));
    }
    return safety * limit;
}

std::vector<double> resolve_output_times(const SolverConfig& cfg, double t_end)
{
    std::vector<double> times{0.0};
    if (!cfg.output_times.empty()) {
        for (double t : cfg.output_times) {
            if (t > times.back() && t <= t_end) times.push_back(t);
        }
        if (times.back() < t_end) times.push_back(t_end);
        return times;
    }
    const std::size_t m = std::max<std::size_t>(cfg.output_count, 1);
    for (std::size_t k = 1; k <= m; ++k) times.push_back(t_end * static_cast<double>(k) / static_cast<double>(m));
    return times;
}

Trajectory run(const RadialDensity& u0, const SolverConfig& cfg, double t_end, const std::vector<Observer>& observers)
{
    return run_from(u_to_w(u0, 0.0), cfg, t_end, observers);
}

Trajectory run_from(const MassFunction& w0, const SolverConfig& cfg, double t_end, const std::vector<Observer>& observers)
{
    if (!(cfg.dt_init > 0.0)) throw std::invalid_argument("run: dt_init must be positive");
    if (!(cfg.dt_max > 0.0)) throw std::invalid_argument("run: dt_max must be positive");
    if (!(cfg.safety > 0.0 && cfg.safety <= 1.0)) throw std::invalid_argument("run: safety must lie in (0,1]");
    if (!(t_end > 0.0)) throw std::invalid_argument("run: t_end must be positive");

    const Mesh& mesh = *w0.mesh;
    const Operator op(mesh, cfg.stencil);
    const bool phi_form = cfg.formulation == Formulation::phi_form;
    const auto times = resolve_output_times(cfg, t_end);

    Trajectory traj;
    traj.invariants.scale = w_star(mesh.dimension(), mesh.s_max());

    auto emit = [&](const std::vector<double>& w, double t) {
        traj.snapshots.push_back(MassFunction{w0.mesh, w, t});
        for (const auto& obs : observers) obs(traj.snapshots.back());
    };

    std::vector<double> w = w0.values;
    std::vector<double> state = w;
    if (phi_form) {
        for (std::size_t j = 0; j <= op.N; ++j) state[j] = op.wstar[j] - w[j];
    }
    track_invariants(op, w, traj.invariants);
    emit(w, 0.0);

    double t = 0.0;
    double dt = cfg.dt_init;
    double dt_sum = 0.0;
    std::size_t next = 1;
    std::vector<double> trial, full, half;
    traj.dt_stats.dt_min = std::numeric_limits<double>::infinity();

    while (next < times.size()) {
        if (traj.dt_stats.steps + traj.dt_stats.rejected >= cfg.max_steps) {
            traj.status = "step budget exhausted at t=" + std::to_string(t);
            break;
        }
        const double target = times[next];
        double cfl = std::numeric_limits<double>::infinity();
        const bool combined = cfg.phi_terms.drift && cfg.phi_terms.transport;
        const bool implicit = cfg.transport == Transport::implicit && (!phi_form || combined);
        if (!implicit) {
            if (!phi_form)
                cfl = cfl_limit(mesh, state, cfg.safety);
            else if (combined)
                cfl = cfl_limit(mesh, w, cfg.safety);
            else if (cfg.phi_terms.transport)
                cfl = cfl_limit(mesh, state, cfg.safety);
        }
        double dt_try = std::min({dt, cfg.dt_max, cfl});
        const bool hits_target = dt_try >= target - t;
        if (hits_target) dt_try = target - t;

        // one full step against two half steps; the difference estimates the local error
        auto advance = [&](const std::vector<double>& from, double t_from, double h, std::vector<double>& to) {
            if (phi_form)
                op.step_phi(from, t_from, h, cfg.phi_terms, cfg.forcing, mesh, cfg.transport, to);
            else
                op.step_w(from, t_from, h, cfg.forcing, mesh, cfg.transport, to);
        };
        try {
            advance(state, t, dt_try, full);
            advance(state, t, 0.5 * dt_try, half);
            advance(half, t + 0.5 * dt_try, 0.5 * dt_try, trial);
        } catch (const StepError& e) {
            traj.exploded = true;
            traj.explosion_time = t;
            traj.status = std::string("numerically exploded at t=") + std::to_string(t) + " (" + e.what() + ")";
            break;
        }

        double err = 0.0;
        for (std::size_t j = 1; j <= op.N; ++j) err = std::max(err, std::abs(trial[j] - full[j]) / op.wstar[j]);
        const double factor = err > 0.0 ? std::clamp(0.9 * std::sqrt(cfg.accuracy_tol / err), 0.2, 2.0) : 2.0;
        if (!std::isfinite(err) || (err > cfg.accuracy_tol && dt_try > 1e-14)) {
            dt = std::isfinite(err) ? factor * dt_try : 0.25 * dt_try;
            ++traj.dt_stats.rejected;
            continue;
        }

        state.swap(trial);
        t = hits_target ? target : t + dt_try;
        ++traj.dt_stats.steps;
        dt_sum += dt_try;
        traj.dt_stats.dt_min = std::min(traj.dt_stats.dt_min, dt_try);
        traj.dt_stats.dt_max = std::max(traj.dt_stats.dt_max, dt_try);

        bool blown = false;
        for (double v : state) {
            if (!std::isfinite(v) || std::abs(v) > cfg.overflow_guard) blown = true;
        }
        if (blown) {
            traj.exploded = true;
            traj.explosion_time = t;
            traj.status = "numerically exploded at t=" + std::to_string(t);
            break;
        }

        if (phi_form) {
            for (std::size_t j = 0; j <= op.N; ++j) w[j] = op.wstar[j] - state[j];
        } else {
            w = state;
        }
        track_invariants(op, w, traj.invariants);

        if (!hits_target) dt = std::min(factor * dt_try, cfg.dt_max);
        if (hits_target) {
            emit(w, t);
            ++next;
        }
    }
    if (traj.dt_stats.steps > 0)
        traj.dt_stats.dt_mean = dt_sum / static_cast<double>(traj.dt_stats.steps);
    else
        traj.dt_stats.dt_min = 0.0;
    return traj;
}

std::string manifest_json(const Trajectory& traj, const SolverConfig& cfg)
{
    nlohmann::json j;
    j["config"] = {{"formulation", to_string(cfg.formulation)},
                   {"stencil", to_string(cfg.stencil)},
                   {"transport", to_string(cfg.transport)},
                   {"dt_init", cfg.dt_init},
                   {"dt_max", cfg.dt_max},
                   {"safety", cfg.safety},
                   {"accuracy_tol", cfg.accuracy_tol},
                   {"invariant_tol", cfg.invariant_tol},
                   {"outer_bc", "dirichlet_frozen"}};
    if (!traj.snapshots.empty()) j["mesh"] = nlohmann::json::parse(mesh_summary_json(*traj.snapshots.front().mesh));
    j["dt"] = {{"steps", traj.dt_stats.steps},
               {"rejected", traj.dt_stats.rejected},
               {"min", traj.dt_stats.dt_min},
               {"max", traj.dt_stats.dt_max},
               {"mean", traj.dt_stats.dt_mean}};
    j["invariants"] = {{"below_zero", traj.invariants.below_zero},
                       {"above_w_star", traj.invariants.above_w_star},
                       {"monotonicity", traj.invariants.monotonicity},
                       {"local_relative", traj.invariants.local_relative},
                       {"scale", traj.invariants.scale},
                       {"holds", traj.invariants.holds(cfg.invariant_tol)}};
    j["status"] = traj.status;
    j["exploded"] = traj.exploded;
    if (traj.exploded) j["explosion_time"] = traj.explosion_time;
    j["snapshots"] = traj.snapshots.size();
    return j.dump(2);
}

}  // namespace kslab
