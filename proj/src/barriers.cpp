#include "kslab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "kslab/cutoff.hpp"
#include "kslab/ode.hpp"

namespace kslab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
// RK4 step for b in units of the relaxation time 1/rate
constexpr double ode_step = 1e-3;
// past this many relaxation times b equals 2B to rounding
constexpr double settle_times = 60.0;

double ws_first(int n, double s) { return 2.0 * (1.0 - 2.0 / n) * std::pow(s, -2.0 / n); }
double ws_second(int n, double s) { return 2.0 * (1.0 - 2.0 / n) * (-2.0 / n) * std::pow(s, -2.0 / n - 1.0); }

}  // namespace

std::string to_string(BarrierKind k)
{
    switch (k) {
    case BarrierKind::growth_supersolution: return "growth_supersolution";
    case BarrierKind::oscillating_subsolution: return "oscillating_subsolution";
    case BarrierKind::mass_barrier: return "mass_barrier";
    }
    return "unknown";
}

std::string to_string(EquationForm f) { return f == EquationForm::form_0w ? "form_0w" : "form_0p"; }

BarrierJet BarrierCertificate::evaluate(double s, double t) const
{
    if (!region_.contains(s, t))
        throw std::out_of_range("barrier evaluated outside its validity region at s=" + std::to_string(s) +
                                ", t=" + std::to_string(t));
    return eval_(s, t);
}

EquationForm BarrierCertificate::native_form() const
{
    return kind_ == BarrierKind::mass_barrier ? EquationForm::form_0w : EquationForm::form_0p;
}

int BarrierCertificate::prescribed_sign(EquationForm form) const
{
    const int native = kind_ == BarrierKind::oscillating_subsolution ? -1 : 1;
    return form == native_form() ? native : -native;
}

double growth_rate(int n, double alpha) { return 2.0 * n * alpha + 2.0 * (n - 2); }

BarrierCertificate growth_supersolution(int n, double alpha, double c1_fit)
{
    if (n < 3) throw std::domain_error("growth_supersolution: n must be >= 3");
    if (!(alpha > 0.0 && alpha < 1.0 - 2.0 / n))
        throw std::domain_error("growth_supersolution: alpha must lie in (0, 1 - 2/n)");
    const double lambda = growth_rate(n, alpha);
    const double c2 = std::max(c1_fit, 2.0);
    nlohmann::json j{{"n", n}, {"alpha", alpha}, {"lambda", lambda}, {"c1_fit", c1_fit}, {"c2", c2}};
    auto eval = [=](double s, double t) {
        const double y = c2 * std::exp(lambda * t);
        const double v = y * std::pow(s, alpha);
        return BarrierJet{v, alpha * v / s, alpha * (alpha - 1.0) * v / (s * s), lambda * v};
    };
    return BarrierCertificate(BarrierKind::growth_supersolution, n, {1.0, inf, 0.0, inf}, eval, j.dump());
}

std::string OscillationParams::to_json() const
{
    nlohmann::json j{{"n", n},   {"s0", s0}, {"omega", omega}, {"mu", mu}, {"k0", k0}, {"s1", s1},
                     {"s_star", s_star}, {"s2", s2}, {"c1", c1}, {"c2", c2}, {"c3", c3}, {"c4", c4}};
    return j.dump();
}

OscillationParams oscillation_params_with_omega(int n, double s0, double omega)
{
    if (n < 3 || n > 9) throw std::domain_error("oscillation parameters need 3 <= n <= 9");
    if (!(s0 > 0.0)) throw std::invalid_argument("oscillation parameters: s0 must be positive");
    const double bound = (n - 2.0) * (10.0 - n) / (4.0 * n * n);
    if (!(omega > 0.0) || !(omega * omega < bound))
        throw std::invalid_argument("oscillation parameters: need 0 < omega^2 < (n-2)(10-n)/(4n^2)");
    OscillationParams p;
    p.n = n;
    p.s0 = s0;
    p.omega = omega;
    p.mu = (n - 2.0) / (2.0 * n);
    const double half = std::numbers::pi / (2.0 * omega);
    // smallest integer k0 with (4k0-1) half > ln s0
    p.k0 = static_cast<int>(std::floor((std::log(s0) / half + 1.0) / 4.0)) + 1;
    while ((4.0 * (p.k0 - 1) - 1.0) * half > std::log(s0)) --p.k0;
    p.s1 = std::exp((4.0 * p.k0 - 1.0) * half);
    p.s_star = std::exp(4.0 * p.k0 * half);
    p.s2 = std::exp((4.0 * p.k0 + 1.0) * half);
    p.c1 = n * n * (p.mu * p.mu - p.mu - omega * omega) + 2.0 * n * p.mu + 2.0 * (n - 2);
    p.c2 = std::pow(p.s2, 2.0 / n);
    p.c3 = n * (p.mu + omega) * std::pow(p.s1, -p.mu);
    return p;
}

OscillationParams oscillation_params(int n, double s0, double omega_fraction)
{
    if (n < 3 || n > 9) throw std::domain_error("oscillation parameters need 3 <= n <= 9");
    if (!(omega_fraction > 0.0 && omega_fraction < 1.0))
        throw std::invalid_argument("oscillation parameters: omega fraction must lie in (0,1)");
    const double omega = omega_fraction * std::sqrt((n - 2.0) * (10.0 - n)) / (2.0 * n);
    return oscillation_params_with_omega(n, s0, omega);
}

double bernoulli_y(double c1, double c2, double c3, double y0, double t)
{
    // divided through by E, so large t does not overflow
    const double Einv = std::exp(-c1 / c2 * (t - 1.0));
    return c1 * y0 / (c1 * Einv + c3 * y0 * (1.0 - Einv));
}

BarrierCertificate oscillating_subsolution(const OscillationParams& p, std::optional<double> y0_in)
{
    double y0 = y0_in ? *y0_in : p.c4 * std::pow(p.s2, -p.mu);
    if (!(y0 > 0.0)) throw std::invalid_argument("oscillating_subsolution: y0 must be positive (measure c4 first)");
    y0 = std::min(y0, p.c1 / p.c3);
    nlohmann::json j = nlohmann::json::parse(p.to_json());
    j["y0"] = y0;
    auto eval = [p, y0](double s, double t) {
        const double y = bernoulli_y(p.c1, p.c2, p.c3, y0, t);
        const double yp = p.c1 / p.c2 * y - p.c3 / p.c2 * y * y;
        const double L = std::log(s);
        const double c = std::cos(p.omega * L), sn = std::sin(p.omega * L);
        const double sm = std::pow(s, p.mu);
        const double f = sm * c;
        const double fs = sm / s * (p.mu * c - p.omega * sn);
        const double fss = sm / (s * s) * ((p.mu * p.mu - p.mu - p.omega * p.omega) * c - (2.0 * p.mu - 1.0) * p.omega * sn);
        return BarrierJet{y * f, y * fs, y * fss, yp * f};
    };
    return BarrierCertificate(BarrierKind::oscillating_subsolution, p.n, {p.s1, p.s2, 1.0, inf}, eval, j.dump());
}

std::string MassBarrierParams::to_json() const
{
    nlohmann::json j{{"n", n}, {"B", B}, {"b0", b0}, {"s_star", s_star}, {"t0", t0}};
    return j.dump();
}

double b_relaxation_rate(const MassBarrierParams& p) { return 2.0 / (std::pow(p.s_star, 2.0 / p.n) + 2.0 * p.B); }

double b_rhs(const MassBarrierParams& p, double b)
{
    return 2.0 * b / (std::pow(p.s_star, 2.0 / p.n) + b) * (2.0 * p.B - b) / (2.0 * p.B);
}

namespace {

double b_step(const MassBarrierParams& p) { return ode_step / b_relaxation_rate(p); }

// time after t0 beyond which b equals 2B to rounding
double settle_time(const MassBarrierParams& p)
{
    return (settle_times + std::log(2.0 * p.B / p.b0)) / b_relaxation_rate(p);
}

}  // namespace

namespace {

void check_b_params(const MassBarrierParams& p)
{
    if (!(p.B > 0.0)) throw std::invalid_argument("mass barrier: B must be positive");
    if (!(p.b0 > 0.0 && p.b0 < 2.0 * p.B)) throw std::invalid_argument("mass barrier: need 0 < b0 < 2B");
    if (!(p.s_star > 0.0)) throw std::invalid_argument("mass barrier: s_star must be positive");
}

// b on the fixed step lattice t0 + k h, extended by one partial step on demand;
// the lattice stops once b has settled at 2B
struct BTable {
    MassBarrierParams p;
    double h;
    std::vector<double> b;

    BTable(const MassBarrierParams& params, double t_end) : p(params)
    {
        check_b_params(p);
        h = b_step(p);
        const ScalarRhs f = [this](double, double y) { return b_rhs(p, y); };
        const double span = std::min(std::max(0.0, t_end - p.t0), settle_time(p));
        const auto steps = static_cast<std::size_t>(std::ceil(span / h)) + 1;
        b.resize(steps + 1);
        b[0] = p.b0;
        for (std::size_t k = 1; k <= steps; ++k) b[k] = rk4_step(f, 0.0, b[k - 1], h);
    }

    double at(double t) const
    {
        const double x = (t - p.t0) / h;
        if (x >= static_cast<double>(b.size() - 1)) return b.back();
        const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
        const double rest = t - (p.t0 + static_cast<double>(k) * h);
        if (rest <= 0.0) return b[k];
        const ScalarRhs f = [this](double, double y) { return b_rhs(p, y); };
        return rk4_integrate(f, 0.0, b[k], rest, h);
    }
};

}  // namespace

double b_solve(const MassBarrierParams& p, double t)
{
    check_b_params(p);
    if (t < p.t0) throw std::invalid_argument("b_solve: t precedes t0");
    const ScalarRhs f = [&p](double, double y) { return b_rhs(p, y); };
    const double t_eff = std::min(t, p.t0 + settle_time(p));
    return rk4_integrate(f, p.t0, p.b0, t_eff, b_step(p));
}

BarrierCertificate mass_barrier(const MassBarrierParams& p, double t_end)
{
    auto table = std::make_shared<const BTable>(p, t_end);
    const int n = p.n;
    auto eval = [table, n](double s, double t) {
        const double b = table->at(t);
        const double bp = b_rhs(table->p, b);
        const double e = std::pow(s, 2.0 / n);
        const double q = e + b;
        const double v = 2.0 * s / q;
        const double vs = ((2.0 - 4.0 / n) * e + 2.0 * b) / (q * q);
        double vss = 0.0;
        if (s > 0.0)
            vss = (-4.0 / n * (1.0 - 2.0 / n) * std::pow(s, -1.0 + 4.0 / n) - (4.0 / n + 8.0 / (n * n)) * b * e / s) /
                  (q * q * q);
        return BarrierJet{v, vs, vss, -2.0 * bp * s / (q * q)};
    };
    return BarrierCertificate(BarrierKind::mass_barrier, n, {0.0, p.s_star, p.t0, t_end}, eval, p.to_json());
}

ResidualField residual(const BarrierCertificate& cert, EquationForm form, const std::vector<double>& s,
                       const std::vector<double>& t)
{
    const int n = cert.dimension();
    ResidualField f;
    f.form = form;
    f.s = s;
    f.t = t;
    f.prescribed_sign = cert.prescribed_sign(form);
    f.values.reserve(s.size() * t.size());
    f.scales.reserve(s.size() * t.size());
    f.min = inf;
    f.max = -inf;
    const bool translate = form != cert.native_form();
    for (double tt : t) {
        for (double ss : s) {
            BarrierJet j = cert.evaluate(ss, tt);
            if (translate) {
                j = {w_star(n, ss) - j.value, ws_first(n, ss) - j.ds, ws_second(n, ss) - j.dss, -j.dt};
            }
            const double kappa = n * n * std::pow(ss, 2.0 - 2.0 / n);
            double N = 0.0, scale = 0.0;
            if (form == EquationForm::form_0w) {
                const double a = kappa * j.dss, b = n * j.value * j.ds;
                N = j.dt - a - b;
                scale = std::abs(j.dt) + std::abs(a) + std::abs(b);
            } else {
                const double a = kappa * j.dss;
                const double b = 2.0 * n * std::pow(ss, 1.0 - 2.0 / n) * j.ds;
                const double c = 2.0 * (n - 2) * std::pow(ss, -2.0 / n) * j.value;
                const double d = n * j.value * j.ds;
                N = j.dt - (a + b + c - d);
                scale = std::abs(j.dt) + std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d);
            }
            f.values.push_back(N);
            f.scales.push_back(scale);
            f.min = std::min(f.min, N);
            f.max = std::max(f.max, N);
            const double wrong = std::max(0.0, -f.prescribed_sign * N);
            if (wrong > 0.0) {
                const double rel = scale > 0.0 ? wrong / scale : inf;
                f.worst_relative_violation = std::max(f.worst_relative_violation, rel);
            }
        }
    }
    return f;
}

std::pair<std::vector<double>, std::vector<double>> certification_grid(double s_lo, double s_hi, double t_lo,
                                                                       double t_hi, std::size_t ns, std::size_t nt)
{
    if (!(s_hi > s_lo) || !(t_hi > t_lo) || ns == 0 || nt == 0)
        throw std::invalid_argument("certification_grid: empty rectangle");
    std::vector<double> s(ns), t(nt);
    const double lo = s_lo > 0.0 ? s_lo : s_hi * 1e-8;
    const bool geometric = s_hi / lo > 10.0;
    for (std::size_t i = 0; i < ns; ++i) {
        const double frac = static_cast<double>(i + 1) / static_cast<double>(ns + 1);
        s[i] = geometric ? std::exp(std::log(lo) + (std::log(s_hi) - std::log(lo)) * frac) : s_lo + (s_hi - s_lo) * frac;
    }
    for (std::size_t i = 0; i < nt; ++i)
        t[i] = t_lo + (t_hi - t_lo) * static_cast<double>(i + 1) / static_cast<double>(nt + 1);
    return {s, t};
}

std::string residual_report_json(const BarrierCertificate& cert, const ResidualField& field)
{
    nlohmann::json j;
    j["kind"] = to_string(cert.kind());
    j["params"] = nlohmann::json::parse(cert.params_json());
    j["equation"] = to_string(field.form);
    j["prescribed_sign"] = field.prescribed_sign;
    j["residual_min"] = field.min;
    j["residual_max"] = field.max;
    j["worst_relative_violation"] = field.worst_relative_violation;
    if (!field.s.empty() && !field.t.empty()) {
        j["grid"] = {{"ns", field.s.size()},
                     {"nt", field.t.size()},
                     {"s_range", {field.s.front(), field.s.back()}},
                     {"t_range", {field.t.front(), field.t.back()}}};
    }
    return j.dump(2);
}

AbsorbingConstant absorbing_constant(int n, double B, std::optional<double> K_in)
{
    if (n < 3 || n > 9) throw std::domain_error("absorbing_constant: need 3 <= n <= 9");
    if (!(B > 0.0)) throw std::domain_error("absorbing_constant: B must be positive");
    const double K = K_in ? *K_in : k_chi();
    const double nn = static_cast<double>(n) * n;
    const double g = 2.0 - 2.0 / n;
    const double p = std::pow(2.0, 4.0 - 2.0 / n);
    AbsorbingConstant a;
    a.c1 = 14.0 * nn * (1.0 + 4.0 * K * K) / B + 4.0 * nn * g * g / B + 64.0 / (B * B * B) +
           4.0 * nn * K * (3.0 + K) / B + 4.0 * n * (1.0 + 2.0 * K) / (B * B) + 2.0 * K / B;
    a.c2 = 14.0 * nn * (1.0 + p * K * K) + 4.0 * nn * g * g + 64.0 + 2.0 * nn * g * (1.0 + 4.0 * K) +
           p * nn * K * (2.0 + K) + 2.0 * K;
    a.C = std::sqrt(8.0 / nn * std::max(a.c1, a.c2) * std::max(2.0 / B, 2.0));
    a.u_bound = n * a.C;
    return a;
}

namespace {

const MassFunction* snapshot_at(const Trajectory& traj, double t)
{
    for (const auto& w : traj.snapshots) {
        if (std::abs(w.t - t) <= 1e-9 * std::max(1.0, t)) return &w;
    }
    return nullptr;
}

}  // namespace

SubsolutionCheck check_subsolution_order(const Trajectory& traj, const OscillationParams& params, double rel_tol)
{
    SubsolutionCheck out;
    out.params = params;
    const MassFunction* w1 = snapshot_at(traj, 1.0);
    if (!w1) throw std::invalid_argument("check_subsolution_order: trajectory has no snapshot at t = 1");
    const Mesh& mesh = *w1->mesh;
    const int n = mesh.dimension();
    const std::size_t lo = mesh.lower_index(params.s1);
    std::size_t hi = mesh.lower_index(params.s2);
    if (hi >= mesh.size() || mesh.s(hi) > params.s2) --hi;
    if (lo > hi || hi >= mesh.size())
        throw std::invalid_argument("check_subsolution_order: no mesh nodes inside [s1, s2]");
    double c4 = inf;
    for (std::size_t j = lo; j <= hi; ++j) c4 = std::min(c4, w_star(n, mesh.s(j)) - w1->values[j]);
    out.params.c4 = c4;
    if (!(c4 > 0.0)) {
        out.holds = false;
        return out;
    }
    const auto& p = out.params;
    out.y0 = std::min(c4 * std::pow(p.s2, -p.mu), p.c1 / p.c3);
    out.floor_at_s_star = p.c1 * std::pow(p.s_star, p.mu) / (2.0 * p.c3);
    if (out.y0 >= p.c1 / (2.0 * p.c3))
        out.t0 = 1.0;
    else
        out.t0 = 1.0 + p.c2 / p.c1 * std::log((p.c1 - p.c3 * out.y0) / (p.c3 * out.y0));
    const auto cert = oscillating_subsolution(p, out.y0);
    for (const auto& w : traj.snapshots) {
        if (w.t < 1.0 - 1e-12) continue;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double s = std::clamp(mesh.s(j), p.s1, p.s2);
            const double sub = cert.value(s, std::max(w.t, 1.0));
            const double phi = w_star(n, mesh.s(j)) - w.values[j];
            out.worst_violation = std::max(out.worst_violation, (sub - phi) / w_star(n, mesh.s(j)));
            ++out.checked_points;
        }
    }
    out.holds = out.worst_violation <= rel_tol;
    return out;
}

MassBarrierCheck check_mass_barrier_order(const Trajectory& traj, const SubsolutionCheck& sub, double s0, double rel_tol)
{
    MassBarrierCheck out;
    const auto& op = sub.params;
    const int n = op.n;
    const double s_star = op.s_star;
    const double M = sub.floor_at_s_star;
    out.params.n = n;
    out.params.s_star = s_star;
    out.params.B = M / (4.0 * std::pow(s_star, 1.0 - 4.0 / n));
    if (!sub.t0 || sub.params.c4 <= 0.0) {
        out.note = "subsolution not instantiated";
        return out;
    }
    const MassFunction* w0 = nullptr;
    for (const auto& w : traj.snapshots) {
        if (w.t >= *sub.t0) {
            w0 = &w;
            break;
        }
    }
    if (!w0) {
        out.note = "t0 lies beyond the run window";
        return out;
    }
    const Mesh& mesh = *w0->mesh;
    const auto u = w_to_u(*w0);
    const double c1u = *std::max_element(u.values.begin(), u.values.end());
    const double s1u = std::pow(n / c1u, n / 2.0);
    double c2u = inf;
    for (std::size_t j = mesh.lower_index(s1u); j < mesh.size() && mesh.s(j) <= s_star; ++j)
        c2u = std::min(c2u, w_star(n, mesh.s(j)) - w0->values[j]);
    const double e = 1.0 - 4.0 / n;
    double b0 = std::min(out.params.B, n / c1u);
    if (std::isfinite(c2u)) b0 = std::min(b0, c2u / (2.0 * std::max(std::pow(s_star, e), std::pow(s1u, e))));
    if (!(b0 > 0.0)) {
        out.note = "no admissible b0 (w touches w_star inside [s1, s_star])";
        return out;
    }
    out.params.b0 = b0;
    out.params.t0 = w0->t;
    const double t_end = traj.snapshots.back().t;
    const auto cert = mass_barrier(out.params, std::max(t_end, w0->t + 1.0));

    // t1: first lattice time with b >= B
    {
        const ScalarRhs f = [&](double, double y) { return b_rhs(out.params, y); };
        double t = out.params.t0, b = b0;
        const double horizon = t + 200.0 / b_relaxation_rate(out.params);
        while (b < out.params.B && t < horizon) {
            b = rk4_step(f, t, b, b_step(out.params));
            t += b_step(out.params);
        }
        if (b >= out.params.B) out.t1 = t;
    }

    for (const auto& w : traj.snapshots) {
        if (w.t < out.params.t0) continue;
        for (std::size_t j = 1; j < mesh.size() && mesh.s(j) <= s_star; ++j) {
            const double s = mesh.s(j);
            const double ws = w_star(n, s);
            out.worst_violation = std::max(out.worst_violation, (w.values[j] - cert.value(s, w.t)) / ws);
            if (out.t1 && w.t >= *out.t1 && s <= s0) {
                const double bound = 2.0 * s / (std::pow(s, 2.0 / n) + out.params.B);
                out.final_violation = std::max(out.final_violation, (w.values[j] - bound) / ws);
            }
            ++out.checked_points;
        }
    }
    out.holds = out.worst_violation <= rel_tol && out.final_violation <= rel_tol;
    if (!out.t1) out.note = "b did not reach B";
    return out;
}

}  // namespace kslab
