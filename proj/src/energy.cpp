#include "kslab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "kslab/cutoff.hpp"
#include "kslab/stencil.hpp"

namespace kslab {

namespace {

double pos(double v) { return v > 0.0 ? v : 0.0; }

double ipow(double base, double e) { return base > 0.0 ? std::pow(base, e) : 0.0; }

// zeta_eps and derivatives, or the constant 1 when eps == 0
Jet2 cut(double eps, double s) { return eps > 0.0 ? zeta_jet(eps, s) : Jet2{1.0, 0.0, 0.0}; }

// Four-point Gauss-Legendre on every mesh interval inside [lo, hi], split at `breaks`,
// with phi and phi_s from the cubic through the four surrounding nodes. The origin
// interval is skipped. f(s, phi, phi_s) returns K integrand values.
template <std::size_t K, class F>
std::array<double, K> integrate_field(const DeviationField& phi, double lo, double hi, const std::vector<double>& breaks,
                                      F&& f)
{
    static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    const Mesh& mesh = *phi.mesh;
    const std::size_t N = mesh.intervals();
    std::array<double, K> sum{};
    if (N < 3) return sum;
    for (std::size_t j = 1; j < N; ++j) {
        const double a0 = mesh.s(j), b0 = mesh.s(j + 1);
        if (b0 <= lo || a0 >= hi) continue;
        const std::size_t i0 = std::min(j - 1, N - 3);
        const double* x = &mesh.s()[i0];
        const double* y = &phi.values[i0];
        std::vector<double> cuts{std::max(a0, lo)};
        for (double b : breaks) {
            if (b > cuts.front() && b < std::min(b0, hi)) cuts.push_back(b);
        }
        cuts.push_back(std::min(b0, hi));
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double a = cuts[c], b = cuts[c + 1];
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int g = 0; g < 4; ++g) {
                const double s = mid + half * gx[g];
                double v = 0.0, dv = 0.0;
                for (int k = 0; k < 4; ++k) {
                    double l = 1.0, dl = 0.0;
                    for (int m = 0; m < 4; ++m) {
                        if (m == k) continue;
                        const double den = x[k] - x[m];
                        dl = dl * (s - x[m]) / den + l / den;
                        l *= (s - x[m]) / den;
                    }
                    v += y[k] * l;
                    dv += y[k] * dl;
                }
                const auto vals = f(s, v, dv);
                for (std::size_t k = 0; k < K; ++k) sum[k] += gw[g] * half * vals[k];
            }
        }
    }
    return sum;
}

std::vector<double> cutoff_breaks(double eps)
{
    if (!(eps > 0.0)) return {};
    return {0.5 * eps, 0.75 * eps, eps, 1.0, 1.0 / eps, 1.5 / eps, 2.0 / eps};
}

double support_lo(double eps) { return eps > 0.0 ? 0.5 * eps : 0.0; }
double support_hi(double eps) { return eps > 0.0 ? 2.0 / eps : std::numeric_limits<double>::infinity(); }

}  // namespace

std::pair<double, double> p_bounds(int n, double gamma)
{
    if (n < 10) throw std::domain_error("p_bounds: needs n >= 10");
    if (!(gamma > 1.0 - 2.0 / n)) throw std::domain_error("p_bounds: needs gamma > 1 - 2/n");
    const double base = n / 4.0 * (gamma - 1.0 + 2.0 / n);
    const double root = std::sqrt((n - 10.0) / (n - 2.0));
    return {base * (1.0 - root), base * (1.0 + root)};
}

double theta_threshold(int n)
{
    if (n < 10) throw std::domain_error("theta_threshold: needs n >= 10");
    return (n - 2.0 + std::sqrt((n - 2.0) * (n - 10.0))) / 2.0;
}

AdmissibilityFlags admissibility(int n, const EnergyParams& q)
{
    AdmissibilityFlags f;
    f.gamma_above_floor = q.gamma > 1.0 - 2.0 / n;
    f.p_above_one = q.p > 1.0;
    f.origin_layer_decay = q.p > n * q.gamma / (n - 2.0) - 1.0;
    f.tail_weight = q.p * q.alpha < q.gamma - 1.0;
    if (n >= 10 && f.gamma_above_floor) {
        const auto [lo, hi] = p_bounds(n, q.gamma);
        const double slack = p_window_slack * std::max(1.0, std::abs(q.p));
        f.p_in_window = q.p >= lo - slack && q.p <= hi + slack;
    }
    return f;
}

EnergyParams select_params(int n, double theta)
{
    const double threshold = theta_threshold(n);
    if (!(theta > threshold)) throw std::domain_error("select_params: theta must exceed the threshold");
    if (!(theta < n - 2.0)) throw std::domain_error("select_params: theta must stay below n - 2");
    EnergyParams q;
    q.alpha = (n - 2.0 - theta) / n;
    const double start = std::max(2.0, 1.0 - 2.0 / n + 0.1);
    for (int k = 0;; ++k) {
        q.gamma = start + 0.5 * k;
        if (q.gamma > 1000.0) break;
        const double p = p_bounds(n, q.gamma).second;
        const bool growth = (q.gamma - 1.0) / p > q.alpha;
        const bool layer = (n / (n - 2.0) * q.gamma - 1.0) / p < 1.0;
        if (growth && layer && p > 1.0) {
            q.p = p;
            if (admissibility(n, q).all()) return q;
        }
    }
    throw std::runtime_error("select_params: no admissible gamma up to 1000");
}

double integrate_nodes(const Mesh& mesh, const std::vector<double>& f)
{
    double sum = 0.0;
    for (std::size_t j = 1; j + 1 < mesh.size(); ++j) sum += 0.5 * (f[j] + f[j + 1]) * (mesh.s(j + 1) - mesh.s(j));
    return sum;
}

double phi_functional(const DeviationField& phi, const EnergyParams& q)
{
    return integrate_field<1>(phi, support_lo(q.eps), support_hi(q.eps), cutoff_breaks(q.eps),
                              [&](double s, double ph, double) {
                                  const double z = cut(q.eps, s).value;
                                  return std::array<double, 1>{std::pow(s, -q.gamma) * z * z * ipow(ph, q.p)};
                              })[0];
}

double IdentityRecord::mismatch(double floor) const
{
    return std::abs(lhs - rhs_sum) / std::max({std::abs(lhs), std::abs(rhs_sum), floor});
}

const std::array<std::string, 6>& identity_term_names()
{
    static const std::array<std::string, 6> names{"gradient", "hardy_weight", "cubic_absorption",
                                                   "layer_first",  "layer_second", "layer_transport"};
    return names;
}

std::array<double, 6> identity_terms(const DeviationField& phi, const EnergyParams& q)
{
    if (!(q.eps > 0.0)) throw std::invalid_argument("identity_terms: needs eps > 0");
    const int n = phi.dimension();
    const double p = q.p, g = q.gamma;
    const auto ints = integrate_field<6>(phi, support_lo(q.eps), support_hi(q.eps), cutoff_breaks(q.eps),
                                         [&](double s, double v, double dv) {
                                             const Jet2 z = zeta_jet(q.eps, s);
                                             const double ph = pos(v);
                                             const double php = ipow(ph, p);
                                             return std::array<double, 6>{
                                                 std::pow(s, 2.0 - 2.0 / n - g) * z.value * z.value *
                                                     ipow(ph, p - 2.0) * dv * dv,
                                                 std::pow(s, -2.0 / n - g) * z.value * z.value * php,
                                                 std::pow(s, -g - 1.0) * z.value * z.value * php * ph,
                                                 std::pow(s, 1.0 - 2.0 / n - g) * z.value * z.d1 * php,
                                                 std::pow(s, 2.0 - 2.0 / n - g) * (z.value * z.d2 + z.d1 * z.d1) * php,
                                                 std::pow(s, -g) * z.value * z.d1 * php * ph,
                                             };
                                         });
    const double nn = n;
    const std::array<double, 6> coef{
        -nn * nn * (p - 1.0),
        nn / p * (nn * g - 2.0 * nn + 4.0) * (g - 1.0 + 2.0 / nn) + 2.0 * (nn - 2.0),
        -nn * g / (p + 1.0),
        -4.0 * nn / p * (nn * g - 2.0 * nn + 3.0),
        2.0 * nn * nn / p,
        2.0 * nn / (p + 1.0),
    };
    std::array<double, 6> out{};
    for (std::size_t k = 0; k < 6; ++k) out[k] = coef[k] * ints[k];
    return out;
}

IdentityRecord energy_identity(const Trajectory& traj, const EnergyParams& q, double t)
{
    if (!(q.eps > 0.0)) throw std::invalid_argument("energy_identity: needs eps > 0");
    const auto& snaps = traj.snapshots;
    std::size_t k = snaps.size();
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        if (std::abs(snaps[i].t - t) <= 1e-12 * std::max(1.0, std::abs(t))) k = i;
    }
    if (k == snaps.size() || k == 0 || k + 1 >= snaps.size())
        throw std::invalid_argument("energy_identity: t must be an interior snapshot time");
    const double hm = snaps[k].t - snaps[k - 1].t, hp = snaps[k + 1].t - snaps[k].t;
    const Weights3 d = central_first(hm, hp);
    IdentityRecord rec;
    rec.t = snaps[k].t;
    const double fm = phi_functional(deviation(snaps[k - 1]), q);
    const double f0 = phi_functional(deviation(snaps[k]), q);
    const double fp = phi_functional(deviation(snaps[k + 1]), q);
    rec.lhs = (d.left * fm + d.centre * f0 + d.right * fp) / q.p;
    rec.terms = identity_terms(deviation(snaps[k]), q);
    for (double v : rec.terms) rec.rhs_sum += v;
    return rec;
}

HardyResult hardy_check(const std::vector<double>& s, const std::vector<double>& psi, const std::vector<double>& psi_s,
                        double beta)
{
    if (!(beta > 1.0)) throw std::invalid_argument("hardy_check: needs beta > 1");
    if (s.size() != psi.size() || s.size() != psi_s.size() || s.size() < 2)
        throw std::invalid_argument("hardy_check: grid and samples differ in size");
    std::vector<double> a(s.size(), 0.0), b(s.size(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] <= 0.0) {
            if (psi[j] != 0.0) throw std::invalid_argument("hardy_check: psi must vanish at s <= 0");
            continue;
        }
        a[j] = std::pow(s[j], -beta) * psi[j] * psi[j];
        b[j] = std::pow(s[j], 2.0 - beta) * psi_s[j] * psi_s[j];
    }
    HardyResult r;
    r.lhs = trapezoid(s, a);
    r.rhs = 4.0 / ((beta - 1.0) * (beta - 1.0)) * trapezoid(s, b);
    r.holds = r.lhs <= r.rhs * (1.0 + 1e-6);
    return r;
}

HardyResult hardy_check(const std::vector<double>& s, const std::vector<double>& psi, double beta)
{
    if (s.size() != psi.size() || s.size() < 3)
        throw std::invalid_argument("hardy_check: grid and samples differ in size");
    return hardy_check(s, psi, first_derivative(s, psi), beta);
}

HardyResult weighted_hardy_bound(const DeviationField& phi, const EnergyParams& q)
{
    if (!(q.eps > 0.0)) throw std::invalid_argument("weighted_hardy_bound: needs eps > 0");
    const int n = phi.dimension();
    const double p = q.p, g = q.gamma;
    const auto ints = integrate_field<4>(phi, support_lo(q.eps), support_hi(q.eps), cutoff_breaks(q.eps),
                                         [&](double s, double v, double dv) {
                                             const Jet2 z = zeta_jet(q.eps, s);
                                             const double ph = pos(v);
                                             const double php = ipow(ph, p);
                                             const double w = std::pow(s, 2.0 - 2.0 / n - g);
                                             return std::array<double, 4>{
                                                 std::pow(s, -2.0 / n - g) * z.value * z.value * php,
                                                 w * z.value * z.value * ipow(ph, p - 2.0) * dv * dv,
                                                 std::pow(s, 1.0 - 2.0 / n - g) * z.value * z.d1 * php,
                                                 w * z.value * z.d2 * php,
                                             };
                                         });
    const double k = g - 1.0 + 2.0 / n;
    HardyResult r;
    r.lhs = ints[0];
    r.rhs = (p * p * ints[1] + 4.0 * (g - 2.0 + 2.0 / n) * ints[2] - 4.0 * ints[3]) / (k * k);
    r.holds = r.lhs <= r.rhs * (1.0 + 1e-6) || r.lhs == 0.0;
    return r;
}

namespace {

double dissipation_density(const MassFunction& w, const EnergyParams& q)
{
    return integrate_field<1>(deviation(w), 0.0, std::numeric_limits<double>::infinity(), {},
                              [&](double s, double ph, double) {
                                  return std::array<double, 1>{std::pow(s, -q.gamma - 1.0) * ipow(ph, q.p + 1.0)};
                              })[0];
}

}  // namespace

std::vector<double> dissipation_integral(const Trajectory& traj, const EnergyParams& q)
{
    std::vector<double> out;
    out.reserve(traj.snapshots.size());
    double total = 0.0, prev = 0.0, prev_t = 0.0;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const double cur = dissipation_density(traj.snapshots[i], q);
        if (i > 0) total += 0.5 * (cur + prev) * (traj.snapshots[i].t - prev_t);
        prev = cur;
        prev_t = traj.snapshots[i].t;
        out.push_back(total);
    }
    return out;
}

double dissipation_bound(const DeviationField& phi0, const EnergyParams& q)
{
    EnergyParams uncut = q;
    uncut.eps = 0.0;
    const int n = phi0.dimension();
    return (q.p + 1.0) / (n * q.gamma * q.p) * phi_functional(phi0, uncut);
}

const std::array<std::string, 7>& cutoff_layer_names()
{
    static const std::array<std::string, 7> names{"origin_zeta_dzeta",   "origin_dzeta_sq", "origin_zeta_d2zeta",
                                                  "origin_transport",    "tail_zeta_dzeta", "tail_dzeta_sq",
                                                  "tail_zeta_d2zeta"};
    return names;
}

double CutoffDecayTable::measured_slope(std::size_t c) const
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (const auto& r : rows) {
        if (!(r.values[c] > 0.0)) continue;
        const double x = std::log(r.eps), y = std::log(r.values[c]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double CutoffDecayTable::min_halving_factor(std::size_t c) const
{
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double a = rows[i].values[c], b = rows[i + 1].values[c];
        const double ratio = b > 0.0 ? a / b : (a > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
        worst = std::min(worst, ratio);
    }
    return worst;
}

CutoffDecayTable cutoff_error_decay(const Trajectory& traj, const EnergyParams& q, const std::vector<double>& eps,
                                    double T)
{
    CutoffDecayTable table;
    const auto& snaps = traj.snapshots;
    if (snaps.empty()) return table;
    const Mesh& mesh = *snaps.front().mesh;
    const int n = mesh.dimension();
    const double p = q.p, g = q.gamma;
    table.origin_exponent = 1.0 - 2.0 / n - g + (1.0 - 2.0 / n) * p;
    table.tail_exponent = -1.0 + 2.0 / n + g - p * q.alpha;

    for (double e : eps) {
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("cutoff_error_decay: eps must lie in (0,1)");
        CutoffLayerRow row;
        row.eps = e;
        std::array<double, 7> prev{};
        double prev_t = 0.0;
        for (std::size_t i = 0; i < snaps.size() && snaps[i].t <= T; ++i) {
            const auto phi = deviation(snaps[i]);
            auto layer = [&](double s, double v, bool origin) {
                const Jet2 z = zeta_jet(e, s);
                const double ph = pos(v);
                const double php = ipow(ph, p);
                const double a = std::pow(s, 1.0 - 2.0 / n - g) * std::abs(z.value * z.d1) * php;
                const double b = std::pow(s, 2.0 - 2.0 / n - g) * z.d1 * z.d1 * php;
                const double c = std::pow(s, 2.0 - 2.0 / n - g) * std::abs(z.value * z.d2) * php;
                const double d = origin ? std::pow(s, -g) * std::abs(z.value * z.d1) * php * ph : 0.0;
                return std::array<double, 4>{a, b, c, d};
            };
            const auto o = integrate_field<4>(phi, 0.5 * e, e, {0.75 * e},
                                              [&](double s, double v, double) { return layer(s, v, true); });
            const auto t = integrate_field<4>(phi, 1.0 / e, 2.0 / e, {1.5 / e},
                                              [&](double s, double v, double) { return layer(s, v, false); });
            const std::array<double, 7> cur{o[0], o[1], o[2], o[3], t[0], t[1], t[2]};
            if (i > 0) {
                for (std::size_t k = 0; k < 7; ++k) row.values[k] += 0.5 * (cur[k] + prev[k]) * (snaps[i].t - prev_t);
            }
            prev = cur;
            prev_t = snaps[i].t;
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_identity_csv(std::ostream& out, const std::vector<IdentityRecord>& records)
{
    out << "t,term,value\n";
    out.precision(17);
    for (const auto& r : records) {
        out << r.t << ",lhs," << r.lhs << '\n';
        for (std::size_t k = 0; k < 6; ++k) out << r.t << ',' << identity_term_names()[k] << ',' << r.terms[k] << '\n';
        out << r.t << ",rhs_sum," << r.rhs_sum << '\n';
    }
}

}  // namespace kslab
