#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/energy.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/mesh.hpp"
#include "kslab/solver.hpp"

namespace kslab {

inline constexpr int summary_schema_version = 1;
inline constexpr std::size_t max_sweep_cells = 10000;

struct MeshSpec {
    double r_max = 60.0;
    std::size_t N = 2048;
    Grading grading = Grading::log;

    double s_max(int n) const;
};

enum class EnergyMode { off, automatic, explicit_params };

std::string to_string(EnergyMode m);
EnergyMode energy_mode_from_string(const std::string& name);

struct ExperimentConfig {
    std::string name = "experiment";
    int n = 10;
    InitialDatumSpec datum;
    MeshSpec mesh;
    SolverConfig solver;
    double t_end = 10.0;

    DiagnosticOptions diagnostics;

    EnergyMode energy_mode = EnergyMode::automatic;  // automatic: select_params(n, theta) for pinched data, n >= 10
    EnergyParams energy{3.0, 2.0, 0.3, 0.01};      // used as given in explicit mode; eps also in automatic mode
    std::vector<double> identity_times;             // default: t_end / 2 when energy is on
    double identity_spacing = 1e-3;                 // neighbouring snapshots at t -+ spacing

    bool barriers = true;  // run-ordering checks for 3 <= n <= 9
    double barrier_s0 = 0.01;
    double omega_fraction = 0.9;
    double absorbing_B = 1.0;  // B in the absorbing constant
    std::optional<double> bounded_level;  // level for the "bounded" verdict; default: the absorbing constant

    std::size_t snapshot_node_stride = 8;

    // sweep axes; empty means "the base value"
    std::vector<double> sweep_n, sweep_theta, sweep_C, sweep_a;

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

/// Builds a configuration; unknown keys are an error.
ExperimentConfig experiment_from_config(const KeyValueConfig& kv);
ExperimentConfig load_experiment(const std::string& path);
/// Inverse of experiment_from_config for every field it reads.
KeyValueConfig to_key_value(const ExperimentConfig& cfg);

/// One monitored property of a run.
struct Check {
    std::string name;
    bool asserted = true;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

struct ExperimentResult {
    ExperimentConfig config;
    Trajectory traj;
    DiagnosticSeries series;
    std::optional<EnergyParams> energy;
    std::vector<IdentityRecord> identity;
    std::vector<Check> checks;
    std::string certificates_json = "{}";

    std::string verdict;  // bounded, growing or inconclusive
    double growth_ratio = 0.0;
    std::optional<double> entry_time;
    double absorbing_level = 0.0;
    double plateau = 0.0;  // median sup-norm over the final quarter of the window

    bool all_asserted_pass() const;
    const Check* find(const std::string& name) const;
    std::string summary_json() const;
};

/// Output times used for a run: equispaced ones plus t = 1, t_end / 2 and the identity neighbourhoods.
std::vector<double> experiment_output_times(const ExperimentConfig& cfg);

/// Energy parameters implied by the configuration, if any.
std::optional<EnergyParams> experiment_energy(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// snapshots.csv, diagnostics.csv, identity.csv, certificates.json, summary.json,
/// manifest.json, config.cfg and one SVG per channel. Creates the directory.
void write_artifacts(const ExperimentResult& result, const std::string& out_dir);

/// Verdict rules: growing if sup grows by >= 3x over the final half window,
/// bounded if an absorbing entry time exists, else inconclusive.
std::string classify(double growth_ratio, const std::optional<double>& entry);

/// sup(t_end) / sup at the first snapshot with t >= t_end / 2.
double final_half_growth(const std::vector<double>& t, const std::vector<double>& sup);

/// Longest stretch past t = t_from over which the channel strictly decreases.
double longest_decrease(const std::vector<double>& t, const std::vector<double>& v, double t_from);

// -- sweeps

struct SweepRow {
    int n = 0;
    std::string family;
    double theta = 0.0, C = 0.0, a = 0.0;
    double sup_final = 0.0;
    double growth_ratio = 0.0;
    std::optional<double> entry_time;
    std::string verdict;
    bool asserted_pass = false;
    std::string status;
};

/// Cartesian product of the axes. Throws std::invalid_argument beyond max_sweep_cells.
std::vector<ExperimentConfig> sweep_cells(const ExperimentConfig& base);
/// Runs every cell on `threads` workers; rows come back in cell order.
std::vector<SweepRow> sweep(const ExperimentConfig& base, std::size_t threads);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// -- verification drivers behind the CLI

struct VerificationReport {
    std::vector<Check> checks;
    std::string json = "{}";
    bool all_asserted_pass() const;
};

/// Residual signs of all certificates on 200 x 200 grids, the logistic closed form
/// against the RK4 oracle, b(t) -> 2B, and for 3 <= n <= 9 the orderings along a run.
VerificationReport verify_barriers(const ExperimentConfig& cfg);

/// Parameter algebra, Hardy suite on deterministic random bumps and, for n >= 10,
/// the energy checks along the configured run.
VerificationReport check_energy(const ExperimentConfig& cfg);

}  // namespace kslab
