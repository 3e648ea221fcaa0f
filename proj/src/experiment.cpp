#include "kslab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "kslab/barriers.hpp"
#include "kslab/cutoff.hpp"
#include "kslab/ode.hpp"

namespace kslab {

namespace {

std::string fmt(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json check_json(const Check& c)
{
    return {{"name", c.name},   {"asserted", c.asserted},   {"passed", c.passed},
            {"value", c.value}, {"threshold", c.threshold}, {"note", c.note}};
}

bool in_stability_regime(const ExperimentConfig& cfg)
{
    return cfg.n >= 10 && cfg.datum.family == DatumFamily::pinched_chandrasekhar &&
           cfg.datum.theta > theta_threshold(cfg.n);
}

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double MeshSpec::s_max(int n) const { return std::pow(r_max, n); }

std::string to_string(EnergyMode m)
{
    switch (m) {
    case EnergyMode::off: return "off";
    case EnergyMode::automatic: return "auto";
    case EnergyMode::explicit_params: return "explicit";
    }
    return "off";
}

EnergyMode energy_mode_from_string(const std::string& name)
{
    if (name == "off") return EnergyMode::off;
    if (name == "auto") return EnergyMode::automatic;
    if (name == "explicit") return EnergyMode::explicit_params;
    throw std::invalid_argument("unknown energy mode '" + name + "'");
}

void ExperimentConfig::validate() const
{
    if (n < 3) throw std::invalid_argument("config: n must be >= 3");
    if (datum.n != n) throw std::invalid_argument("config: datum dimension differs from n");
    if (!(t_end > 0.0)) throw std::invalid_argument("config: t_end must be positive");
    if (mesh.N < 8) throw std::invalid_argument("config: mesh.N must be >= 8");
    if (!(mesh.r_max > 0.0)) throw std::invalid_argument("config: mesh.r_max must be positive");
    if (!std::isfinite(mesh.s_max(n))) throw std::invalid_argument("config: r_max^n overflows");
    if (!(diagnostics.annulus_r1 < diagnostics.annulus_r2) || diagnostics.annulus_r2 > mesh.r_max)
        throw std::invalid_argument("config: annulus must satisfy r1 < r2 <= r_max");
    if (!(diagnostics.gap_r0 > 0.0)) throw std::invalid_argument("config: gap_r0 must be positive");
    if (snapshot_node_stride == 0) throw std::invalid_argument("config: snapshot_node_stride must be >= 1");
    if (energy_mode == EnergyMode::explicit_params && !admissibility(std::max(n, 10), energy).p_above_one)
        throw std::invalid_argument("config: explicit energy parameters need p > 1");
    if (energy.eps < 0.0 || energy.eps >= 1.0) throw std::invalid_argument("config: energy eps must lie in [0,1)");
    for (double t : identity_times) {
        if (!(t - identity_spacing > 0.0 && t + identity_spacing < t_end))
            throw std::invalid_argument("config: identity times need neighbours inside (0, t_end)");
    }
    if (!(barrier_s0 > 0.0)) throw std::invalid_argument("config: barrier s0 must be positive");
    if (!(omega_fraction > 0.0 && omega_fraction < 1.0))
        throw std::invalid_argument("config: omega_fraction must lie in (0,1)");
    if (!(absorbing_B > 0.0)) throw std::invalid_argument("config: absorbing_B must be positive");
    // the datum must be constructible
    InitialDatumSpec d = datum;
    if (d.family == DatumFamily::pinched_chandrasekhar) {
        const double cap = d.cap > 0.0 ? d.cap : default_cap(d);
        if (cap < minimal_cap(d)) throw std::invalid_argument("config: datum cap below the minimal cap");
    }
}

ExperimentConfig experiment_from_config(const KeyValueConfig& kv)
{
    ExperimentConfig c;
    c.name = kv.get("run", "name", c.name);
    c.n = static_cast<int>(kv.get_int("run", "n", c.n));
    c.t_end = kv.get_double("run", "t_end", c.t_end);
    c.solver.output_count = static_cast<std::size_t>(kv.get_int("run", "output_count", 100));
    c.solver.output_times = kv.get_list("run", "output_times");

    c.datum.n = c.n;
    c.datum.family = datum_family_from_string(kv.get("datum", "family", to_string(c.datum.family)));
    c.datum.theta = kv.get_double("datum", "theta", c.datum.theta);
    c.datum.C = kv.get_double("datum", "C", c.datum.C);
    c.datum.a = kv.get_double("datum", "a", c.datum.a);
    c.datum.radius = kv.get_double("datum", "radius", c.datum.radius);
    c.datum.cap = kv.get_double("datum", "cap", c.datum.cap);

    c.mesh.r_max = kv.get_double("mesh", "r_max", c.mesh.r_max);
    c.mesh.N = static_cast<std::size_t>(kv.get_int("mesh", "N", static_cast<long>(c.mesh.N)));
    c.mesh.grading = grading_from_string(kv.get("mesh", "grading", to_string(c.mesh.grading)));

    auto& s = c.solver;
    s.formulation = formulation_from_string(kv.get("solver", "formulation", to_string(s.formulation)));
    s.stencil = stencil_from_string(kv.get("solver", "stencil", to_string(s.stencil)));
    s.transport = transport_from_string(kv.get("solver", "transport", to_string(s.transport)));
    s.dt_init = kv.get_double("solver", "dt_init", s.dt_init);
    s.dt_max = kv.get_double("solver", "dt_max", 0.5);
    s.safety = kv.get_double("solver", "safety", s.safety);
    s.accuracy_tol = kv.get_double("solver", "accuracy_tol", s.accuracy_tol);
    s.invariant_tol = kv.get_double("solver", "invariant_tol", s.invariant_tol);
    s.max_steps = static_cast<std::size_t>(kv.get_int("solver", "max_steps", static_cast<long>(s.max_steps)));

    auto& d = c.diagnostics;
    if (kv.has("diagnostics", "ball_radii")) d.ball_radii = kv.get_list("diagnostics", "ball_radii");
    d.annulus_r1 = kv.get_double("diagnostics", "annulus_r1", d.annulus_r1);
    d.annulus_r2 = kv.get_double("diagnostics", "annulus_r2", d.annulus_r2);
    d.gap_r0 = kv.get_double("diagnostics", "gap_r0", d.gap_r0);
    d.bernstein = kv.get_bool("diagnostics", "bernstein", c.n <= 9);
    d.bernstein_eps = kv.get_double("diagnostics", "bernstein_eps", d.bernstein_eps);
    d.bernstein_t1 = kv.get_double("diagnostics", "bernstein_t1", d.bernstein_t1);
    c.snapshot_node_stride =
        static_cast<std::size_t>(kv.get_int("diagnostics", "snapshot_node_stride", static_cast<long>(c.snapshot_node_stride)));

    c.energy_mode = energy_mode_from_string(kv.get("energy", "mode", to_string(c.energy_mode)));
    c.energy.p = kv.get_double("energy", "p", c.energy.p);
    c.energy.gamma = kv.get_double("energy", "gamma", c.energy.gamma);
    c.energy.alpha = kv.get_double("energy", "alpha", c.energy.alpha);
    c.energy.eps = kv.get_double("energy", "eps", c.energy.eps);
    c.identity_times = kv.get_list("energy", "identity_times");
    c.identity_spacing = kv.get_double("energy", "identity_spacing", c.identity_spacing);

    c.barriers = kv.get_bool("barriers", "enabled", c.barriers);
    c.barrier_s0 = kv.get_double("barriers", "s0", c.barrier_s0);
    c.omega_fraction = kv.get_double("barriers", "omega_fraction", c.omega_fraction);
    c.absorbing_B = kv.get_double("barriers", "absorbing_B", c.absorbing_B);
    if (kv.has("barriers", "bounded_level")) c.bounded_level = kv.get_double("barriers", "bounded_level", 0.0);

    c.sweep_n = kv.get_list("sweep", "n");
    c.sweep_theta = kv.get_list("sweep", "theta");
    c.sweep_C = kv.get_list("sweep", "C");
    c.sweep_a = kv.get_list("sweep", "a");

    const auto unused = kv.unused();
    if (!unused.empty()) {
        std::string list;
        for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
        throw std::invalid_argument("config: unknown keys: " + list);
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment(const std::string& path) { return experiment_from_config(KeyValueConfig::load(path)); }

KeyValueConfig to_key_value(const ExperimentConfig& c)
{
    KeyValueConfig kv;
    kv.set("run", "name", c.name);
    kv.set("run", "n", std::to_string(c.n));
    kv.set("run", "t_end", fmt(c.t_end));
    kv.set("run", "output_count", std::to_string(c.solver.output_count));
    if (!c.solver.output_times.empty()) kv.set("run", "output_times", fmt_list(c.solver.output_times));

    kv.set("datum", "family", to_string(c.datum.family));
    kv.set("datum", "theta", fmt(c.datum.theta));
    kv.set("datum", "C", fmt(c.datum.C));
    kv.set("datum", "a", fmt(c.datum.a));
    kv.set("datum", "radius", fmt(c.datum.radius));
    kv.set("datum", "cap", fmt(c.datum.cap));

    kv.set("mesh", "r_max", fmt(c.mesh.r_max));
    kv.set("mesh", "N", std::to_string(c.mesh.N));
    kv.set("mesh", "grading", to_string(c.mesh.grading));

    const auto& s = c.solver;
    kv.set("solver", "formulation", to_string(s.formulation));
    kv.set("solver", "stencil", to_string(s.stencil));
    kv.set("solver", "transport", to_string(s.transport));
    kv.set("solver", "dt_init", fmt(s.dt_init));
    kv.set("solver", "dt_max", fmt(s.dt_max));
    kv.set("solver", "safety", fmt(s.safety));
    kv.set("solver", "accuracy_tol", fmt(s.accuracy_tol));
    kv.set("solver", "invariant_tol", fmt(s.invariant_tol));
    kv.set("solver", "max_steps", std::to_string(s.max_steps));

    const auto& d = c.diagnostics;
    kv.set("diagnostics", "ball_radii", fmt_list(d.ball_radii));
    kv.set("diagnostics", "annulus_r1", fmt(d.annulus_r1));
    kv.set("diagnostics", "annulus_r2", fmt(d.annulus_r2));
    kv.set("diagnostics", "gap_r0", fmt(d.gap_r0));
    kv.set("diagnostics", "bernstein", d.bernstein ? "true" : "false");
    kv.set("diagnostics", "bernstein_eps", fmt(d.bernstein_eps));
    kv.set("diagnostics", "bernstein_t1", fmt(d.bernstein_t1));
    kv.set("diagnostics", "snapshot_node_stride", std::to_string(c.snapshot_node_stride));

    kv.set("energy", "mode", to_string(c.energy_mode));
    kv.set("energy", "p", fmt(c.energy.p));
    kv.set("energy", "gamma", fmt(c.energy.gamma));
    kv.set("energy", "alpha", fmt(c.energy.alpha));
    kv.set("energy", "eps", fmt(c.energy.eps));
    if (!c.identity_times.empty()) kv.set("energy", "identity_times", fmt_list(c.identity_times));
    kv.set("energy", "identity_spacing", fmt(c.identity_spacing));

    kv.set("barriers", "enabled", c.barriers ? "true" : "false");
    kv.set("barriers", "s0", fmt(c.barrier_s0));
    kv.set("barriers", "omega_fraction", fmt(c.omega_fraction));
    kv.set("barriers", "absorbing_B", fmt(c.absorbing_B));
    if (c.bounded_level) kv.set("barriers", "bounded_level", fmt(*c.bounded_level));

    if (!c.sweep_n.empty()) kv.set("sweep", "n", fmt_list(c.sweep_n));
    if (!c.sweep_theta.empty()) kv.set("sweep", "theta", fmt_list(c.sweep_theta));
    if (!c.sweep_C.empty()) kv.set("sweep", "C", fmt_list(c.sweep_C));
    if (!c.sweep_a.empty()) kv.set("sweep", "a", fmt_list(c.sweep_a));
    return kv;
}

std::optional<EnergyParams> experiment_energy(const ExperimentConfig& cfg)
{
    switch (cfg.energy_mode) {
    case EnergyMode::off: return std::nullopt;
    case EnergyMode::explicit_params: return cfg.energy;
    case EnergyMode::automatic:
        if (!in_stability_regime(cfg) || !(cfg.datum.theta < cfg.n - 2.0)) return std::nullopt;
        {
            EnergyParams q = select_params(cfg.n, cfg.datum.theta);
            q.eps = cfg.energy.eps;
            return q;
        }
    }
    return std::nullopt;
}

namespace {

std::vector<double> identity_times_of(const ExperimentConfig& cfg, bool energy_on)
{
    if (!energy_on) return {};
    if (!cfg.identity_times.empty()) return cfg.identity_times;
    return {0.5 * cfg.t_end};
}

}  // namespace

std::vector<double> experiment_output_times(const ExperimentConfig& cfg)
{
    std::vector<double> t;
    if (!cfg.solver.output_times.empty()) {
        t = cfg.solver.output_times;
    }
    else {
        const std::size_t m = std::max<std::size_t>(cfg.solver.output_count, 1);
        for (std::size_t k = 1; k <= m; ++k) t.push_back(cfg.t_end * static_cast<double>(k) / static_cast<double>(m));
    }
    if (cfg.t_end > 1.0) t.push_back(1.0);
    // early transient: 20 points per decade so time integrals of the diagnostics resolve it
    const double first = *std::min_element(t.begin(), t.end());
    for (double x = 1e-4 * std::min(1.0, cfg.t_end); x < first; x *= std::pow(10.0, 0.05)) t.push_back(x);
    t.push_back(0.5 * cfg.t_end);
    t.push_back(cfg.t_end);
    const bool energy_on = experiment_energy(cfg).has_value();
    for (double ti : identity_times_of(cfg, energy_on)) {
        t.push_back(ti - cfg.identity_spacing);
        t.push_back(ti);
        t.push_back(ti + cfg.identity_spacing);
    }
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    for (double x : t) {
        if (x <= 0.0 || x > cfg.t_end) continue;
        if (out.empty() || x - out.back() > 1e-12 * cfg.t_end) out.push_back(x);
    }
    return out;
}

double final_half_growth(const std::vector<double>& t, const std::vector<double>& sup)
{
    if (t.empty()) return 0.0;
    const double half = 0.5 * t.back();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= half - 1e-12 * t.back()) return sup[i] > 0.0 ? sup.back() / sup[i] : 0.0;
    }
    return 0.0;
}

double longest_decrease(const std::vector<double>& t, const std::vector<double>& v, double t_from)
{
    double longest = 0.0;
    std::optional<double> start;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i - 1] < t_from) continue;
        const bool down = v[i] < v[i - 1] * (1.0 - 1e-12);
        if (down) {
            if (!start) start = t[i - 1];
            longest = std::max(longest, t[i] - *start);
        }
        else {
            start.reset();
        }
    }
    return longest;
}

std::string classify(double growth_ratio, const std::optional<double>& entry)
{
    if (growth_ratio >= 3.0) return "growing";
    if (entry) return "bounded";
    return "inconclusive";
}

bool ExperimentResult::all_asserted_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.passed; });
}

const Check* ExperimentResult::find(const std::string& name) const
{
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg_in)
{
    cfg_in.validate();
    ExperimentResult res;
    res.config = cfg_in;
    const auto& cfg = res.config;
    const int n = cfg.n;

    const auto mesh = build_mesh(n, cfg.mesh.s_max(n), cfg.mesh.N, cfg.mesh.grading);
    const auto u0 = make_datum(mesh, cfg.datum);
    SolverConfig sc = cfg.solver;
    sc.output_times = experiment_output_times(cfg);
    res.traj = run(u0, sc, cfg.t_end);
    res.energy = experiment_energy(cfg);

    DiagnosticOptions dopt = cfg.diagnostics;
    if (res.energy) {
        dopt.energy = true;
        dopt.energy_params = *res.energy;
    }
    res.series = diagnose(res.traj, dopt);
    const auto& t = res.series.times("sup_norm");
    const auto& sup = res.series.values("sup_norm");

    auto add = [&](Check c) { res.checks.push_back(std::move(c)); };

    add({"no_explosion", true, !res.traj.exploded, res.traj.exploded ? res.traj.explosion_time : 0.0, 0.0,
         res.traj.status});
    add({"solver_invariants", true, res.traj.invariants.holds(sc.invariant_tol), res.traj.invariants.worst() / res.traj.invariants.scale,
         sc.invariant_tol, "0 <= w <= w_star, w nondecreasing in s; relative to w_star(S_max)"});
    {
        const auto& ex = res.series.values("ball_excess");
        const double worst = ex.empty() ? 0.0 : *std::max_element(ex.begin(), ex.end());
        add({"mass_average_bound", true, worst <= 1e-6, worst, 1e-6, "ball average <= 2n/r^2, relative"});
    }

    res.growth_ratio = final_half_growth(t, sup);
    if (cfg.bounded_level)
        res.absorbing_level = *cfg.bounded_level;
    else if (n <= 9)
        res.absorbing_level = absorbing_constant(n, cfg.absorbing_B).u_bound;
    else
        res.absorbing_level = 0.0;
    if (res.absorbing_level > 0.0) res.entry_time = absorbing_entry(t, sup, res.absorbing_level);
    {
        std::vector<double> tail;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] >= 0.75 * cfg.t_end) tail.push_back(sup[i]);
        }
        res.plateau = median(tail);
    }
    res.verdict = classify(res.growth_ratio, res.entry_time);

    if (n <= 9) {
        add({"absorbing_entry", true, res.entry_time.has_value(), res.entry_time.value_or(-1.0), res.absorbing_level,
             "sup-norm stays below the absorbing constant from the entry time on"});
        const auto& gap = res.series.values(channel_name("gap", cfg.diagnostics.gap_r0));
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] >= 0.75 * cfg.t_end) worst = std::min(worst, gap[i]);
        }
        add({"repulsion_gap_positive", true, worst > 0.0, worst, 0.0, "final quarter of the window"});
    }

    if (in_stability_regime(cfg)) {
        const double dec = longest_decrease(t, sup, 1.0);
        add({"blowup_trend", true, dec <= 0.05 * cfg.t_end, dec, 0.05 * cfg.t_end,
             "longest decreasing stretch of the sup-norm past t = 1"});
        const auto& ann = res.series.values("annulus_err");
        double at1 = ann.front();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] <= 1.0 + 1e-12) at1 = ann[i];
        }
        const double ratio = ann.back() > 0.0 ? at1 / ann.back() : std::numeric_limits<double>::infinity();
        add({"annulus_converging", true, ratio >= 2.0, ratio, 2.0, "annulus error at t = 1 over the final one"});
        add({"growth_3x", false, res.growth_ratio >= 3.0, res.growth_ratio, 3.0,
             "sup-norm ratio over the final half window (verdict rule, reported only)"});
    }

    if (res.energy) {
        const auto& e = res.series.values("energy");
        double worst = 0.0;
        for (std::size_t i = 1; i < e.size(); ++i) worst = std::max(worst, e[i] - e[i - 1]);
        const double rel = e.front() > 0.0 ? worst / e.front() : worst;
        add({"energy_monotone", true, rel <= 1e-3, rel, 1e-3, "largest increase of phi_eps relative to phi_eps(0)"});

        const auto& dis = res.series.values("dissipation");
        double before = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] <= 0.9 * cfg.t_end + 1e-12) before = dis[i];
        }
        const double total = dis.back();
        const double frac = total > 0.0 ? (total - before) / total : 0.0;
        add({"dissipation_plateau", true, frac < 0.05, frac, 0.05, "share of the total gained in the last tenth"});

        if (res.energy->eps > 0.0) {
            double worst_mis = 0.0;
            for (double ti : identity_times_of(cfg, true)) {
                res.identity.push_back(energy_identity(res.traj, *res.energy, ti));
                worst_mis = std::max(worst_mis, res.identity.back().mismatch());
            }
            add({"identity_consistency", true, worst_mis <= 1e-2, worst_mis, 1e-2,
                 "relative mismatch of the energy identity at mid-run"});
        }
    }

    nlohmann::json certs = nlohmann::json::object();
    if (in_stability_regime(cfg) && cfg.datum.theta < n - 2.0) {
        const double alpha = alpha_of(n, cfg.datum.theta);
        const double c1 = sup_growth(deviation(res.traj.snapshots.front()), alpha);
        const auto cert = growth_supersolution(n, alpha, c1);
        const auto [gs, gt] = certification_grid(1.0, cfg.mesh.s_max(n), 0.0, std::min(1.0, cfg.t_end), 200, 200);
        const auto field = residual(cert, EquationForm::form_0p, gs, gt);
        certs["growth_supersolution"] = nlohmann::json::parse(residual_report_json(cert, field));
        bool above = true;
        double worst = 0.0;
        for (const auto& w : res.traj.snapshots) {
            if (w.t > 1.0) break;
            for (std::size_t j = 1; j < w.mesh->size(); ++j) {
                const double s = w.mesh->s(j);
                if (s < 1.0) continue;
                const double phi = w_star(n, s) - w.values[j];
                const double bar = cert.value(s, w.t);
                worst = std::max(worst, (phi - bar) / w_star(n, s));
            }
        }
        above = worst <= 1e-6;
        certs["growth_supersolution"]["run_order_worst"] = worst;
        add({"growth_supersolution_order", true, above, worst, 1e-6, "phi below the supersolution for t <= 1"});
    }
    std::optional<OscillationParams> osc;
    if (cfg.barriers && n >= 3 && n <= 9 && cfg.t_end > 1.0) {
        osc = oscillation_params(n, cfg.barrier_s0, cfg.omega_fraction);
        // the comparison needs the whole window [s1, s2] inside the domain
        if (osc->s2 >= cfg.mesh.s_max(n)) {
            const std::string note = "window [s1, s2] = [" + fmt(osc->s1) + ", " + fmt(osc->s2) +
                                     "] exceeds S_max; not instantiated";
            certs["oscillating_subsolution"] = {{"params", nlohmann::json::parse(osc->to_json())}, {"note", note}};
            add({"subsolution_order", false, false, 0.0, 1e-6, note});
            add({"mass_barrier_order", false, false, 0.0, 1e-6, note});
            osc.reset();
        }
    }
    if (osc) {
        const auto& params = *osc;
        const auto sub = check_subsolution_order(res.traj, params);
        nlohmann::json js;
        js["params"] = nlohmann::json::parse(sub.params.to_json());
        js["y0"] = sub.y0;
        js["t0"] = opt_json(sub.t0);
        js["floor_at_s_star"] = sub.floor_at_s_star;
        js["worst_violation"] = sub.worst_violation;
        js["checked_points"] = sub.checked_points;
        js["holds"] = sub.holds;
        certs["oscillating_subsolution"] = js;
        add({"subsolution_order", true, sub.holds, sub.worst_violation, 1e-6, "phi above the oscillating subsolution"});
        const auto mb = check_mass_barrier_order(res.traj, sub, cfg.barrier_s0);
        nlohmann::json jm;
        jm["params"] = nlohmann::json::parse(mb.params.to_json());
        jm["t1"] = opt_json(mb.t1);
        jm["worst_violation"] = mb.worst_violation;
        jm["final_violation"] = mb.final_violation;
        jm["checked_points"] = mb.checked_points;
        jm["holds"] = mb.holds;
        jm["note"] = mb.note;
        certs["mass_barrier"] = jm;
        const bool instantiated = mb.note.empty() || mb.note == "b did not reach B";
        add({"mass_barrier_order", instantiated, mb.holds, mb.worst_violation, 1e-6,
             mb.note.empty() ? "w below the mass barrier after t0" : mb.note});
    }
    res.certificates_json = certs.dump(2);
    return res;
}

std::string ExperimentResult::summary_json() const
{
    const auto& cfg = config;
    nlohmann::json j;
    j["schema_version"] = summary_schema_version;
    j["name"] = cfg.name;
    j["n"] = cfg.n;
    j["datum"] = {{"family", to_string(cfg.datum.family)},
                  {"theta", cfg.datum.theta},
                  {"C", cfg.datum.C},
                  {"a", cfg.datum.a},
                  {"radius", cfg.datum.radius},
                  {"cap", cfg.datum.cap > 0.0 ? cfg.datum.cap : default_cap(cfg.datum)}};
    j["mesh"] = {{"r_max", cfg.mesh.r_max}, {"N", cfg.mesh.N}, {"grading", to_string(cfg.mesh.grading)}};
    j["t_end"] = cfg.t_end;
    j["status"] = traj.status;
    j["exploded"] = traj.exploded;
    j["snapshots"] = traj.snapshots.size();
    j["verdict"] = verdict;
    j["growth_ratio"] = growth_ratio;
    j["absorbing_level"] = absorbing_level;
    j["absorbing_entry"] = entry_time ? nlohmann::json(*entry_time) : nlohmann::json("none");
    j["plateau"] = plateau;
    const auto& sup = series.values("sup_norm");
    j["sup_norm"] = {{"initial", sup.front()}, {"final", sup.back()}, {"max", *std::max_element(sup.begin(), sup.end())}};
    for (const char* key : {"blowup_trend", "annulus_converging"}) {
        if (const auto* c = find(key)) j[key] = c->passed;
    }
    if (energy) {
        const auto f = admissibility(cfg.n, *energy);
        j["energy"] = {{"p", energy->p},
                       {"gamma", energy->gamma},
                       {"alpha", energy->alpha},
                       {"eps", energy->eps},
                       {"flags",
                        {{"gamma_above_floor", f.gamma_above_floor},
                         {"p_above_one", f.p_above_one},
                         {"origin_layer_decay", f.origin_layer_decay},
                         {"tail_weight", f.tail_weight},
                         {"p_in_window", f.p_in_window}}}};
    }
    nlohmann::json checks_json = nlohmann::json::array();
    for (const auto& c : checks) checks_json.push_back(check_json(c));
    j["invariants"] = checks_json;
    j["all_asserted_pass"] = all_asserted_pass();
    return j.dump(2);
}

void write_artifacts(const ExperimentResult& res, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("snapshots.csv");
        f << "t,s,r,w,u\n";
        f.precision(12);
        for (const auto& w : res.traj.snapshots) {
            const auto u = w_to_u(w);
            for (std::size_t j = 0; j < w.mesh->size(); j += res.config.snapshot_node_stride)
                f << w.t << ',' << w.mesh->s(j) << ',' << w.mesh->r(j) << ',' << w.values[j] << ',' << u.values[j] << '\n';
        }
    }
    {
        auto f = open("diagnostics.csv");
        res.series.write_csv(f);
    }
    if (!res.identity.empty()) {
        auto f = open("identity.csv");
        write_identity_csv(f, res.identity);
    }
    {
        auto f = open("certificates.json");
        f << res.certificates_json << '\n';
    }
    {
        auto f = open("summary.json");
        f << res.summary_json() << '\n';
    }
    {
        auto f = open("manifest.json");
        SolverConfig sc = res.config.solver;
        sc.output_times = experiment_output_times(res.config);
        f << manifest_json(res.traj, sc) << '\n';
    }
    {
        auto f = open("config.cfg");
        to_key_value(res.config).write(f);
    }
    for (const auto& name : res.series.names()) {
        std::string file = name;
        std::replace(file.begin(), file.end(), '@', '_');
        auto f = open("plot_" + file + ".svg");
        res.series.write_svg(f, name);
    }
}

std::vector<ExperimentConfig> sweep_cells(const ExperimentConfig& base)
{
    auto axis = [](const std::vector<double>& v, double fallback) { return v.empty() ? std::vector<double>{fallback} : v; };
    const auto ns = axis(base.sweep_n, base.n);
    const auto thetas = axis(base.sweep_theta, base.datum.theta);
    const auto Cs = axis(base.sweep_C, base.datum.C);
    const auto as = axis(base.sweep_a, base.datum.a);
    const double cells = static_cast<double>(ns.size()) * thetas.size() * Cs.size() * as.size();
    if (cells > static_cast<double>(max_sweep_cells))
        throw std::invalid_argument("sweep: " + fmt(cells) + " cells exceed the limit of " +
                                    std::to_string(max_sweep_cells));
    std::vector<ExperimentConfig> out;
    for (double n : ns) {
        for (double th : thetas) {
            for (double C : Cs) {
                for (double a : as) {
                    ExperimentConfig c = base;
                    c.n = static_cast<int>(n);
                    if (static_cast<double>(c.n) != n) throw std::invalid_argument("sweep: n must be an integer");
                    c.datum.n = c.n;
                    c.datum.theta = th;
                    c.datum.C = C;
                    c.datum.a = a;
                    c.sweep_n.clear();
                    c.sweep_theta.clear();
                    c.sweep_C.clear();
                    c.sweep_a.clear();
                    c.identity_times.clear();
                    std::ostringstream name;
                    name << base.name << "_n" << c.n << "_theta" << th << "_C" << C << "_a" << a;
                    c.name = name.str();
                    out.push_back(c);
                }
            }
        }
    }
    return out;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, std::size_t threads)
{
    const auto cells = sweep_cells(base);
    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& c = cells[i];
            SweepRow row;
            row.n = c.n;
            row.family = to_string(c.datum.family);
            row.theta = c.datum.theta;
            row.C = c.datum.C;
            row.a = c.datum.a;
            try {
                const auto res = run_experiment(c);
                row.sup_final = res.series.values("sup_norm").back();
                row.growth_ratio = res.growth_ratio;
                row.entry_time = res.entry_time;
                row.verdict = res.verdict;
                row.asserted_pass = res.all_asserted_pass();
                row.status = res.traj.status;
            } catch (const std::exception& e) {
                row.verdict = "inconclusive";
                row.status = std::string("error: ") + e.what();
            }
            rows[i] = row;
        }
    };
    const std::size_t k = std::max<std::size_t>(1, std::min(threads, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << "n,family,theta,C,a,sup_final,growth_ratio,absorbing_entry,verdict,asserted_pass,status\n";
    out.precision(10);
    for (const auto& r : rows) {
        out << r.n << ',' << r.family << ',' << r.theta << ',' << r.C << ',' << r.a << ',' << r.sup_final << ','
            << r.growth_ratio << ',';
        if (r.entry_time)
            out << *r.entry_time;
        else
            out << "none";
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        out << ',' << r.verdict << ',' << (r.asserted_pass ? "true" : "false") << ',' << status << '\n';
    }
}

bool VerificationReport::all_asserted_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.passed; });
}

namespace {

void certify(VerificationReport& rep, nlohmann::json& js, const std::string& name, const BarrierCertificate& cert,
             EquationForm form, const std::pair<std::vector<double>, std::vector<double>>& grid)
{
    const auto field = residual(cert, form, grid.first, grid.second);
    js[name + "_" + to_string(form)] = nlohmann::json::parse(residual_report_json(cert, field));
    rep.checks.push_back({name + "_residual_" + to_string(form), true, field.certified(1e-8),
                          field.worst_relative_violation, 1e-8, "wrong-sign residual relative to the local term scale"});
}

}  // namespace

VerificationReport verify_barriers(const ExperimentConfig& cfg)
{
    VerificationReport rep;
    nlohmann::json js;
    const int n = cfg.n;

    {
        const double alpha = (n >= 10 && cfg.datum.family == DatumFamily::pinched_chandrasekhar &&
                              cfg.datum.theta < n - 2.0)
                                 ? alpha_of(n, cfg.datum.theta)
                                 : 0.5 * (1.0 - 2.0 / n);
        const auto cert = growth_supersolution(n, alpha, 1.0);
        const auto grid = certification_grid(1.0, cfg.mesh.s_max(n), 0.0, 1.0, 200, 200);
        certify(rep, js, "growth_supersolution", cert, EquationForm::form_0p, grid);
        certify(rep, js, "growth_supersolution", cert, EquationForm::form_0w, grid);
    }

    if (n >= 3 && n <= 9) {
        const auto p = oscillation_params(n, cfg.barrier_s0, cfg.omega_fraction);
        // y0 at half the cap, so the logistic phase is visible on the grid
        const double y0 = 0.5 * p.c1 / p.c3;
        const auto sub = oscillating_subsolution(p, y0);
        const double t_hi = 1.0 + 20.0 * p.c2 / p.c1;
        certify(rep, js, "oscillating_subsolution", sub, EquationForm::form_0p,
                certification_grid(p.s1, p.s2, 1.0, t_hi, 200, 200));

        // logistic closed form against the RK4 oracle
        const ScalarRhs f = [&](double, double y) { return p.c1 / p.c2 * y - p.c3 / p.c2 * y * y; };
        double worst = 0.0;
        const double y_small = 1e-3 * p.c1 / p.c3;
        for (double y_start : {y_small, y0}) {
            double y = y_start, tt = 1.0;
            for (int k = 1; k <= 200; ++k) {
                const double t_next = 1.0 + (t_hi - 1.0) * k / 200.0;
                y = rk4_integrate(f, tt, y, t_next, 1e-3 * p.c2 / p.c1);
                tt = t_next;
                const double exact = bernoulli_y(p.c1, p.c2, p.c3, y_start, tt);
                worst = std::max(worst, std::abs(y - exact) / std::abs(exact));
            }
        }
        rep.checks.push_back({"bernoulli_closed_form", true, worst <= 1e-8, worst, 1e-8,
                              "closed-form logistic solution against RK4"});
        js["bernoulli"] = {{"worst_relative", worst}, {"params", nlohmann::json::parse(p.to_json())}};

        MassBarrierParams mp;
        mp.n = n;
        mp.s_star = p.s_star;
        const double M = p.c1 * std::pow(p.s_star, p.mu) / (2.0 * p.c3);
        mp.B = M / (4.0 * std::pow(p.s_star, 1.0 - 4.0 / n));
        mp.b0 = 0.5 * mp.B;
        mp.t0 = 0.0;
        const double rate = b_relaxation_rate(mp);
        const double T = 20.0 / rate;
        const auto mass = mass_barrier(mp, T);
        certify(rep, js, "mass_barrier", mass, EquationForm::form_0w, certification_grid(0.0, mp.s_star, 0.0, T, 200, 200));

        bool monotone = true;
        double prev = mp.b0;
        for (int k = 1; k <= 400; ++k) {
            const double b = b_solve(mp, T * k / 400.0);
            if (b < prev) monotone = false;
            prev = b;
        }
        const double gap = std::abs(prev - 2.0 * mp.B) / mp.B;
        rep.checks.push_back({"b_monotone", true, monotone, monotone ? 1.0 : 0.0, 1.0, "b nondecreasing on [0, T]"});
        rep.checks.push_back({"b_limit", true, gap < 1e-3, gap, 1e-3, "|b(T) - 2B| / B at T = 20 / rate"});
        js["b_relaxation"] = {{"params", nlohmann::json::parse(mp.to_json())}, {"rate", rate}, {"T", T},
                              {"b_T", prev}, {"relative_gap", gap}};

        // orderings along an actual run
        if (cfg.barriers && cfg.t_end > 1.0) {
            const auto res = run_experiment(cfg);
            for (const char* key : {"subsolution_order", "mass_barrier_order"}) {
                if (const auto* c = res.find(key)) rep.checks.push_back(*c);
            }
            js["run"] = nlohmann::json::parse(res.certificates_json);
        }
    }
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks) checks.push_back(check_json(c));
    js["checks"] = checks;
    js["all_asserted_pass"] = rep.all_asserted_pass();
    rep.json = js.dump(2);
    return rep;
}

VerificationReport check_energy(const ExperimentConfig& cfg)
{
    VerificationReport rep;
    nlohmann::json js;

    // parameter algebra
    {
        const auto [lo, hi] = p_bounds(10, 5.0);
        const bool ok = lo == 10.5 && hi == 10.5 && theta_threshold(10) == 4.0 && theta_threshold(11) == 6.0;
        rep.checks.push_back({"parameter_values", true, ok, hi, 10.5, "p_bounds(10,5), thresholds for n = 10, 11"});
        bool flags = true;
        for (auto [n, th] : {std::pair{10, 4.2}, std::pair{11, 6.5}, std::pair{18, 14.0}})
            flags = flags && admissibility(n, select_params(n, th)).all();
        rep.checks.push_back({"select_params_flags", true, flags, flags ? 1.0 : 0.0, 1.0,
                              "all five flags at (10,4.2), (11,6.5), (18,14)"});
    }

    // Hardy inequality on deterministic random bumps
    {
        std::mt19937_64 rng(20240611ULL);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::size_t fails = 0;
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double a = 0.05 + 2.0 * U(rng);
            const double b = a * (1.2 + 4.0 * U(rng));
            const double beta = 1.1 + 4.9 * U(rng);
            const int m = 1 + static_cast<int>(3 * U(rng));
            std::vector<double> s(801), psi(801), dpsi(801);
            for (std::size_t j = 0; j < s.size(); ++j) {
                s[j] = a + (b - a) * static_cast<double>(j) / 800.0;
                const double x = (s[j] - a) / (b - a);
                const double bump = std::pow(std::sin(M_PI * x), 2.0);
                const double wave = 1.0 + 0.5 * std::sin(2.0 * M_PI * m * x);
                psi[j] = bump * wave;
                dpsi[j] = (2.0 * std::sin(M_PI * x) * std::cos(M_PI * x) * M_PI * wave +
                           bump * 0.5 * std::cos(2.0 * M_PI * m * x) * 2.0 * M_PI * m) /
                          (b - a);
            }
            const auto r = hardy_check(s, psi, dpsi, beta);
            if (!r.holds) ++fails;
            worst = std::max(worst, r.lhs / r.rhs);
        }
        rep.checks.push_back({"hardy_random_bumps", true, fails == 0, worst, 1.0, "largest lhs/rhs over 1000 bumps"});
        const auto mesh = build_mesh(10, std::pow(60.0, 10), 4096, Grading::log);
        const auto w0 = MassFunction{mesh, std::vector<double>(mesh->size(), 0.0), 0.0};
        const auto hb = weighted_hardy_bound(deviation(w0), EnergyParams{10.5, 5.0, 0.0, 0.05});
        rep.checks.push_back({"weighted_hardy_w_star", true, hb.holds, hb.lhs / hb.rhs, 1.0,
                              "phi = w_star, n = 10, gamma = 5, p = 10.5, eps = 0.05"});
        js["hardy"] = {{"random_worst_ratio", worst}, {"weighted_lhs", hb.lhs}, {"weighted_rhs", hb.rhs}};
    }

    if (cfg.n >= 10 && experiment_energy(cfg)) {
        const auto res = run_experiment(cfg);
        for (const char* key : {"energy_monotone", "dissipation_plateau", "identity_consistency"}) {
            if (const auto* c = res.find(key)) rep.checks.push_back(*c);
        }
        const auto q = *res.energy;
        const double total = dissipation_integral(res.traj, EnergyParams{q.p, q.gamma, q.alpha, 0.0}).back();
        const double bound = dissipation_bound(deviation(res.traj.snapshots.front()), q);
        rep.checks.push_back({"dissipation_bounded", true, total <= bound, total, bound,
                              "total dissipation against its bound from the initial energy"});
        nlohmann::json ids = nlohmann::json::array();
        for (const auto& r : res.identity) ids.push_back({{"t", r.t}, {"lhs", r.lhs}, {"rhs", r.rhs_sum}, {"mismatch", r.mismatch()}});
        js["identity"] = ids;
        js["energy_params"] = {{"p", q.p}, {"gamma", q.gamma}, {"alpha", q.alpha}, {"eps", q.eps}};
    }
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks) checks.push_back(check_json(c));
    js["checks"] = checks;
    js["all_asserted_pass"] = rep.all_asserted_pass();
    rep.json = js.dump(2);
    return rep;
}

}  // namespace kslab
