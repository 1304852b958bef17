#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splitlab/analysis.hpp"
#include "splitlab/splitting.hpp"

namespace splitlab {

/// Named experiment presets. fig* presets reproduce the convergence studies;
/// "bounds" runs the scalar inequality/identity suites; "oracle" runs the
/// exact-global-error equivalence study.
struct ExperimentSpec {
    std::string preset;
    int grid_override = 0;          // intervals per axis; 0 = preset default
    std::vector<double> taus;       // empty = 0.02*2^-k, k = 0..6
    std::vector<std::string> methods;  // empty = preset default
    std::vector<std::string> norms;    // labels; empty = preset default
    std::string out_path;           // CSV path; NDJSON written next to it
    bool paper_scale = false;

    static std::vector<double> default_taus();
    static std::vector<std::string> known_presets();
};

struct ReferenceSolver {
    enum class Variant { cn_1d, rk4_2d };
    Variant variant = Variant::cn_1d;
    double tau_ref = 0.02 / 1024.0;  // 0.02 * 2^-10
};

/// The printed problems. Throws on unknown id. N is the intervals per axis.
Problem preset_problem(const std::string& id, int n);

/// dimension of a preset's domain (1 or 2)
int preset_dimension(const std::string& id);

/// desk-scale default grid (N=200 in 1d, N=50 in 2d), paper scale behind the flag
int preset_default_intervals(const std::string& id, bool paper_scale);

/// Integrates the unsplit semi-discrete system du/dt = A u + g_b + f(u) at
/// tau_ref: trapezoidal rule with fixed-point iteration (1d) or classical
/// RK4 (2d, with a spectral-radius stability guard). Snapshots are recorded
/// every record_stride steps.
Trajectory compute_reference(const Problem& p, const ReferenceSolver& solver, int record_stride);

/// power-iteration estimate of the spectral radius of A_h
double spectral_radius_estimate(const BandMatrix& a, int iterations = 100);

struct Verdict {
    std::string check;
    double value = 0.0;
    std::optional<double> lo, hi;
    bool pass = false;
};

struct ExperimentResult {
    // tables[method][norm label]; the order vectors preserve the run order
    std::map<std::string, std::map<std::string, ConvergenceTable>> tables;
    std::vector<std::string> method_order;
    std::vector<std::string> norm_order;
    std::vector<double> taus;
    std::vector<Verdict> verdicts;
    BoundReport bound_report;  // populated by the bounds preset
    bool all_pass() const;
};

/// Runs a preset end to end: integrations in a work pool with deterministic
/// ordering, norm tables, preset acceptance predicates.
ExperimentResult run_preset(const ExperimentSpec& spec);

/// CSV rows "experiment,method,norm,tau,error" (17 significant digits)
void write_experiment_csv(const std::string& experiment, const ExperimentResult& result,
                          std::ostream& os);

/// one NDJSON record per verdict (and per bound check for the bounds preset)
void write_experiment_ndjson(const std::string& experiment, const ExperimentResult& result,
                             std::ostream& os);

/// Full CLI entry: runs the preset, writes outputs, prints verdicts.
/// Returns 0 if all predicates pass, 1 on predicate failure, 2 on numerical
/// failure.
int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace splitlab
