#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kslab/energy.hpp"
#include "kslab/fields.hpp"
#include "kslab/solver.hpp"

namespace kslab {

double sup_norm(const RadialDensity& u);

struct BallAverage {
    double value = 0.0;
    double bound = 0.0;  // 2n/r^2
    bool within = true;  // value <= bound (1 + 1e-6)
};

/// Mean of u over the ball of radius r, n w(r^n)/r^n. Between nodes w/w_star is
/// interpolated linearly in s. Throws std::out_of_range unless 0 < r <= r_max.
BallAverage ball_average(const MassFunction& w, double r);
BallAverage ball_average(const RadialDensity& u, double r);

/// Largest relative excess of the ball average over 2n/r^2 across all nodes, i.e.
/// max_j (w_j / w_star_j - 1); 0 when the bound holds everywhere.
double ball_average_excess(const MassFunction& w);

/// max |u - u_star| over nodes with r in [r1, r2], never below the third node.
/// Throws std::invalid_argument when no node qualifies or r1 >= r2.
double annulus_error(const RadialDensity& u, double r1, double r2);

/// First time after which the channel stays <= C until the end; nullopt if the last sample exceeds C.
std::optional<double> absorbing_entry(const std::vector<double>& t, const std::vector<double>& values, double C);

/// min over nodes with 0 < r <= r0, and r0 itself, of 2n/r^2 - ball average.
double repulsion_gap(const MassFunction& w, double r0);

/// max over nodes of chi(t - t1) s zeta_eps^2(s) w_s^2 / w, skipping nodes with
/// w below 1e-14 w_star(S_max). w_s uses weights exact on 1, s and s^{1-2/n}.
double bernstein_monitor(const MassFunction& w, double eps, double t, double t1);

/// Named scalar channels sampled at strictly increasing times.
class DiagnosticSeries {
public:
    /// Throws std::invalid_argument if t does not exceed the channel's last time.
    void add(const std::string& channel, double t, double value);

    bool has(const std::string& channel) const { return channels_.count(channel) > 0; }
    const std::vector<double>& times(const std::string& channel) const;
    const std::vector<double>& values(const std::string& channel) const;
    std::vector<std::string> names() const { return order_; }

    std::string metadata;  // free-form reference to the producing run

    /// One row per distinct time; missing samples are left empty.
    void write_csv(std::ostream& out) const;
    /// Line plot of one channel.
    void write_svg(std::ostream& out, const std::string& channel) const;

private:
    struct Channel {
        std::vector<double> t, v;
    };
    std::map<std::string, Channel> channels_;
    std::vector<std::string> order_;
};

struct DiagnosticOptions {
    std::vector<double> ball_radii{0.5, 1.0, 2.0};
    double annulus_r1 = 1.0;
    double annulus_r2 = 2.0;
    double gap_r0 = 1.0;
    bool energy = false;  // energy and dissipation channels, n >= 10 only
    EnergyParams energy_params;
    bool bernstein = false;
    double bernstein_eps = 0.1;
    double bernstein_t1 = 0.0;
};

/// Evaluates every selected channel at every snapshot.
/// Channels: sup_norm, ball_avg@r, annulus_err, gap@r0, ball_excess, and when enabled
/// energy, dissipation, bernstein.
DiagnosticSeries diagnose(const Trajectory& traj, const DiagnosticOptions& opts);

/// Formats a radius for a channel name, e.g. "ball_avg@0.5".
std::string channel_name(const std::string& base, double r);

}  // namespace kslab
