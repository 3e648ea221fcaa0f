#include "kslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "kslab/cutoff.hpp"
#include "kslab/stencil.hpp"

namespace kslab {

double sup_norm(const RadialDensity& u)
{
    double m = 0.0;
    for (double v : u.values) m = std::max(m, v);
    return m;
}

BallAverage ball_average(const MassFunction& w, double r)
{
    const Mesh& mesh = *w.mesh;
    const int n = mesh.dimension();
    if (!(r > 0.0) || r > mesh.r_max() * (1.0 + 1e-12))
        throw std::out_of_range("ball_average: radius outside the mesh");
    const double s = std::min(std::pow(r, n), mesh.s_max());
    std::size_t k = mesh.lower_index(s);
    k = std::clamp<std::size_t>(k, 1, mesh.intervals());
    double ratio;
    if (mesh.s(k) == s || k == 1) {
        ratio = w.values[k] / w_star(n, mesh.s(k));
    }
    else {
        const double a = w.values[k - 1] / w_star(n, mesh.s(k - 1));
        const double b = w.values[k] / w_star(n, mesh.s(k));
        const double x = (s - mesh.s(k - 1)) / (mesh.s(k) - mesh.s(k - 1));
        ratio = a + x * (b - a);
    }
    BallAverage out;
    out.bound = 2.0 * n / (r * r);
    out.value = ratio * out.bound;
    out.within = out.value <= out.bound * (1.0 + 1e-6);
    return out;
}

BallAverage ball_average(const RadialDensity& u, double r) { return ball_average(u_to_w(u), r); }

double ball_average_excess(const MassFunction& w)
{
    const Mesh& mesh = *w.mesh;
    double worst = 0.0;
    for (std::size_t j = 1; j < mesh.size(); ++j)
        worst = std::max(worst, w.values[j] / w_star(mesh.dimension(), mesh.s(j)) - 1.0);
    return worst;
}

double annulus_error(const RadialDensity& u, double r1, double r2)
{
    if (!(r1 < r2)) throw std::invalid_argument("annulus_error: needs r1 < r2");
    const Mesh& mesh = *u.mesh;
    double worst = -1.0;
    for (std::size_t j = 2; j < mesh.size(); ++j) {
        const double r = mesh.r(j);
        if (r < r1 || r > r2) continue;
        worst = std::max(worst, std::abs(u.values[j] - u_star(mesh.dimension(), r)));
    }
    if (worst < 0.0) throw std::invalid_argument("annulus_error: no mesh node in the annulus");
    return worst;
}

std::optional<double> absorbing_entry(const std::vector<double>& t, const std::vector<double>& values, double C)
{
    if (t.size() != values.size()) throw std::invalid_argument("absorbing_entry: size mismatch");
    if (t.empty()) return std::nullopt;
    std::size_t last_above = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(values[i] <= C)) last_above = i;
    }
    if (last_above == t.size()) return t.front();
    if (last_above + 1 == t.size()) return std::nullopt;
    return t[last_above + 1];
}

double repulsion_gap(const MassFunction& w, double r0)
{
    if (!(r0 > 0.0)) throw std::invalid_argument("repulsion_gap: needs r0 > 0");
    const Mesh& mesh = *w.mesh;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < mesh.size() && mesh.r(j) <= r0; ++j) {
        const auto b = ball_average(w, mesh.r(j));
        gap = std::min(gap, b.bound - b.value);
    }
    if (r0 <= mesh.r_max()) {
        const auto b = ball_average(w, r0);
        gap = std::min(gap, b.bound - b.value);
    }
    return gap;
}

double bernstein_monitor(const MassFunction& w, double eps, double t, double t1)
{
    const double xi_t = chi(t - t1);
    if (xi_t == 0.0) return 0.0;
    const Mesh& mesh = *w.mesh;
    const int n = mesh.dimension();
    const double floor = 1e-14 * w_star(n, mesh.s_max());
    const double e = 1.0 - 2.0 / n;
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < mesh.size(); ++j) {
        if (!(w.values[j] > floor)) continue;
        const double s = mesh.s(j);
        const double z = zeta(eps, s);
        if (z == 0.0) continue;
        const Stencil3 st{{mesh.s(j - 1), s, mesh.s(j + 1)},
                          {std::pow(mesh.s(j - 1), e), std::pow(s, e), std::pow(mesh.s(j + 1), e)}};
        const auto d = fit_weights(central_first(s - mesh.s(j - 1), mesh.s(j + 1) - s), st, e * std::pow(s, e - 1.0));
        const double ws = d.left * w.values[j - 1] + d.centre * w.values[j] + d.right * w.values[j + 1];
        worst = std::max(worst, xi_t * s * z * z * ws * ws / w.values[j]);
    }
    return worst;
}

void DiagnosticSeries::add(const std::string& channel, double t, double value)
{
    auto it = channels_.find(channel);
    if (it == channels_.end()) {
        order_.push_back(channel);
        it = channels_.emplace(channel, Channel{}).first;
    }
    if (!it->second.t.empty() && !(t > it->second.t.back()))
        throw std::invalid_argument("DiagnosticSeries: times must increase strictly in channel " + channel);
    it->second.t.push_back(t);
    it->second.v.push_back(value);
}

const std::vector<double>& DiagnosticSeries::times(const std::string& channel) const
{
    const auto it = channels_.find(channel);
    if (it == channels_.end()) throw std::out_of_range("no channel " + channel);
    return it->second.t;
}

const std::vector<double>& DiagnosticSeries::values(const std::string& channel) const
{
    const auto it = channels_.find(channel);
    if (it == channels_.end()) throw std::out_of_range("no channel " + channel);
    return it->second.v;
}

void DiagnosticSeries::write_csv(std::ostream& out) const
{
    std::set<double> all;
    for (const auto& [name, ch] : channels_) all.insert(ch.t.begin(), ch.t.end());
    out << "t";
    for (const auto& name : order_) out << ',' << name;
    out << '\n';
    out << std::setprecision(12);
    std::map<std::string, std::size_t> cursor;
    for (double t : all) {
        out << t;
        for (const auto& name : order_) {
            const auto& ch = channels_.at(name);
            auto& c = cursor[name];
            out << ',';
            if (c < ch.t.size() && ch.t[c] == t) out << ch.v[c++];
        }
        out << '\n';
    }
}

void DiagnosticSeries::write_svg(std::ostream& out, const std::string& channel) const
{
    const auto& t = times(channel);
    const auto& v = values(channel);
    constexpr double W = 640, H = 400, pad = 50;
    double t0 = t.empty() ? 0.0 : t.front(), t1 = t.empty() ? 1.0 : t.back();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : v) {
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (!(hi > lo)) {
        lo = std::isfinite(lo) ? lo - 1.0 : 0.0;
        hi = lo + 2.0;
    }
    if (!(t1 > t0)) t1 = t0 + 1.0;
    auto X = [&](double x) { return pad + (x - t0) / (t1 - t0) * (W - 2 * pad); };
    auto Y = [&](double y) { return H - pad - (y - lo) / (hi - lo) * (H - 2 * pad); };
    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"" << pad / 2 << "\" font-family=\"sans-serif\" font-size=\"14\">" << channel
        << "</text>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"" << H - pad / 3 << "\" font-size=\"11\">" << t0 << "</text>\n";
    out << "<text x=\"" << W - pad << "\" y=\"" << H - pad / 3 << "\" font-size=\"11\" text-anchor=\"end\">" << t1
        << "</text>\n";
    out << "<text x=\"4\" y=\"" << H - pad << "\" font-size=\"11\">" << lo << "</text>\n";
    out << "<text x=\"4\" y=\"" << pad << "\" font-size=\"11\">" << hi << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::isfinite(v[i])) out << X(t[i]) << ',' << Y(v[i]) << ' ';
    }
    out << "\"/>\n</svg>\n";
}

std::string channel_name(const std::string& base, double r)
{
    std::ostringstream os;
    os << base << '@' << r;
    return os.str();
}

DiagnosticSeries diagnose(const Trajectory& traj, const DiagnosticOptions& opts)
{
    DiagnosticSeries series;
    if (traj.snapshots.empty()) return series;
    std::vector<double> dissipation;
    if (opts.energy) {
        EnergyParams uncut = opts.energy_params;
        uncut.eps = 0.0;
        dissipation = dissipation_integral(traj, uncut);
    }
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const auto& w = traj.snapshots[i];
        const auto u = w_to_u(w);
        series.add("sup_norm", w.t, sup_norm(u));
        for (double r : opts.ball_radii) {
            if (r <= w.mesh->r_max()) series.add(channel_name("ball_avg", r), w.t, ball_average(w, r).value);
        }
        series.add("annulus_err", w.t, annulus_error(u, opts.annulus_r1, opts.annulus_r2));
        series.add(channel_name("gap", opts.gap_r0), w.t, repulsion_gap(w, opts.gap_r0));
        series.add("ball_excess", w.t, ball_average_excess(w));
        if (opts.energy) {
            series.add("energy", w.t, phi_functional(deviation(w), opts.energy_params));
            series.add("dissipation", w.t, dissipation[i]);
        }
        if (opts.bernstein)
            series.add("bernstein", w.t, bernstein_monitor(w, opts.bernstein_eps, w.t, opts.bernstein_t1));
    }
    return series;
}

}  // namespace kslab
