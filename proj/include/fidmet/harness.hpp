#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fidmet/channels.hpp"
#include "fidmet/tmetric.hpp"

namespace fidmet {

enum class Experiment {
    Axioms,
    Contractivity,
    JointConvexitySq,
    JointConvexityRaw,
    UpperBound,
    Theorem1,
    Theorem2,
    Eq5,
    Prop1,
};

std::string_view experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

// How the T-metric is evaluated inside experiments. Auto uses the exact
// closed form at d = 2 and the numeric maximizer elsewhere; Numeric forces
// the maximizer everywhere (used to validate the optimizer itself against
// the closed form).
enum class TMetricMode { Auto, Numeric };

struct ExperimentSpec {
    Experiment experiment = Experiment::Axioms;
    MetricKind metric = MetricKind::TMetric;
    std::vector<int> dims = {2};
    long trials = 1;
    std::uint64_t seed = 0;
    std::vector<int> env_dims = {1}; // contractivity only
    OptimizerConfig optimizer;
    TMetricMode tmetric_mode = TMetricMode::Auto;
};

struct Witness {
    long trial_index = 0;
    int dim = 0;
    std::string check;      // which inequality failed, e.g. "M4", "contractivity"
    double lambda = -1.0;   // joint-convexity mixing weight, -1 when unused
    std::vector<Matrix> states;
    std::optional<KrausChannel> channel;
    std::vector<std::uint64_t> eval_seeds; // optimizer seeds, in evaluation order
};

struct GapStats {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
    long count = 0;
};

struct ExperimentReport {
    ExperimentSpec spec;
    long trials_run = 0;
    long violations = 0;
    double max_violation = 0.0;
    std::optional<Witness> witness;
    long non_converged = 0;
    double wall_time_s = 0.0;
    // Per-dimension upper-bound gap distribution (upper_bound experiment).
    std::map<int, GapStats> gap_stats;
    // Rank histogram of T-metric argmax states (optimizer-backed runs).
    std::map<int, long> argmax_rank_counts;
    // Raw per-trial margins, one entry per completed trial, for CSV export.
    std::vector<double> per_trial_margin;
};

// Metric axioms M1 (non-negativity), M2 (identity of indiscernibles, on
// constructed equal and perturbed pairs), M3 (symmetry), M4 (triangle).
ExperimentReport run_axioms(const ExperimentSpec& spec);

// d(phi(rho), phi(sigma)) <= d(rho, sigma) under random CPTP maps.
ExperimentReport run_contractivity(const ExperimentSpec& spec);

// Joint convexity of d (squared = false) or d^2 (squared = true). For the
// raw T-metric this is a counterexample search: success is violations >= 1.
ExperimentReport run_joint_convexity(const ExperimentSpec& spec, bool squared);

// gap = sqrt(1 - F) - D_T(numeric) >= -tol::upper_bound_guard per trial.
ExperimentReport run_upper_bound(const ExperimentSpec& spec);

// Theorem 1 / Theorem 2 / Bures equivalent form / spectral-metric sampling
// oracle, selected by spec.experiment.
ExperimentReport run_theorem_checks(const ExperimentSpec& spec);

// Dispatch on spec.experiment.
ExperimentReport run_experiment(const ExperimentSpec& spec);

// Recompute the violated inequality from a persisted witness; returns the
// margin, which must reproduce report.max_violation.
double replay_witness(const ExperimentSpec& spec, const Witness& witness);

// Writes "trial,margin" rows of per-trial margins.
void write_margins_csv(const ExperimentReport& report, const std::string& path);

} // namespace fidmet
