#pragma once

#include "salab/linalg.hpp"
#include "salab/noise.hpp"
#include "salab/operators.hpp"
#include "salab/rng.hpp"
#include "salab/schedules.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace salab {

struct DiagnosticsConfig {
    /// Convergence tolerance on the tail sup; defaults to 0.05 (1 + u_0).
    std::optional<double> epsilon;
    /// A step is a jump event when the noise displacement alpha_k |w_k| reaches this.
    double jump_threshold = 4.0;
    double tail_fraction = 0.1;
    /// Projection width for upcrossing counts.
    double D = 1.0;
    /// Moment order used for the admissibility verdict.
    double p = 2.0;
    /// Divergence when tail_sup exceeds this factor times (1 + u_0).
    double divergence_factor = 10.0;

    double epsilon_for(double u0) const noexcept { return epsilon ? *epsilon : 0.05 * (1.0 + u0); }
};

enum class Outcome { Converged, Undecided, Diverged, NonFinite };

const char* to_string(Outcome outcome);

struct Checkpoint {
    std::uint64_t k;
    double u;
};

struct TrajectoryRecord {
    std::uint64_t trajectory_id = 0;
    std::vector<Checkpoint> checkpoints;
    /// Steps whose noise displacement alpha_k |w_k| reached the jump threshold.
    std::uint64_t jump_events = 0;
    /// Steps with |x_{k+1} - x_k| >= jump threshold.
    std::uint64_t large_steps = 0;
    /// Steps with non-zero noise.
    std::uint64_t noise_firings = 0;
    double tail_sup = 0.0;
    std::uint64_t upcrossings = 0;
    Vector final_state;
    double u0 = 0.0;
    double final_u = 0.0;
    double epsilon = 0.0;
    std::uint64_t steps_completed = 0;
    Outcome outcome = Outcome::Undecided;
};

/// k in {0} U {ceil(10^(j/16))} U {N-1}, restricted to [0, N-1], strictly increasing.
std::vector<std::uint64_t> checkpoint_indices(std::uint64_t N);

/// Iterates x_{k+1} = x_k + alpha_k (H(x_k) - x_k + w_k) for N steps.
/// A non-finite state ends the run with outcome NonFinite.
TrajectoryRecord run_trajectory(const Operator& op, const NoiseModel& noise, const StepSchedule& schedule,
                                const Vector& x0, std::uint64_t N, const DiagnosticsConfig& diag,
                                const RandomStream& stream);

struct Scenario {
    std::string name;
    Operator op;
    NoiseModel noise;
    StepSchedule schedule;
    Vector x0;
    std::uint64_t horizon = 1;
    std::uint64_t n_trajectories = 1;
    std::uint64_t seed = 0;
    DiagnosticsConfig diagnostics;

    /// Same scenario with xi replaced in the schedule and, for three-point
    /// noise, in the noise construction.
    Scenario with_xi(double xi) const;
};

struct Quantiles {
    double q10 = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
    double q90 = 0.0;
};

/// Linear-interpolation quantiles; +inf values sort last.
Quantiles quantiles(std::vector<double> values);

struct CheckpointBand {
    std::uint64_t k;
    double q25;
    double median;
    double q75;
};

struct EnsembleReport {
    std::string scenario;
    std::string operator_family;
    std::uint64_t n_trajectories = 0;
    std::uint64_t horizon = 0;
    double epsilon = 0.0;
    double converged_fraction = 0.0;
    double diverged_fraction = 0.0;
    std::uint64_t nonfinite_count = 0;
    Quantiles tail_sup;
    Quantiles final_u;
    double mean_jump_events = 0.0;
    double jump_events_se = 0.0;
    double mean_large_steps = 0.0;
    double mean_noise_firings = 0.0;
    double mean_upcrossings = 0.0;
    std::optional<double> expected_jump_count;
    double p = 2.0;
    std::optional<Summability> admissibility;
    std::vector<CheckpointBand> bands;
};

EnsembleReport aggregate(const Scenario& scenario, const std::vector<TrajectoryRecord>& records);

struct EnsembleResult {
    std::vector<TrajectoryRecord> records;
    EnsembleReport report;
};

/// Trajectory i uses RandomStream(seed, i). Results are reduced in
/// trajectory order, so output does not depend on `parallelism`.
/// parallelism 0 means hardware concurrency.
EnsembleResult run_ensemble(const Scenario& scenario, unsigned parallelism = 1);

struct PhaseRow {
    double xi;
    bool admissible;
    double converged_fraction;
    double mean_jumps;
    double jump_se;
    std::optional<double> analytic_jumps;
};

struct PhaseScan {
    std::vector<PhaseRow> rows;
    std::vector<EnsembleResult> cells;
};

/// One ensemble per xi, all with the scenario's base seed.
PhaseScan phase_scan(const Scenario& scenario, const std::vector<double>& xi_list, unsigned parallelism = 1);

/// X_{n+1} = X_n + alpha_n (Z_n - X_n), Z_n = mean + w_n, started at X_0 = 0
/// so that X_1 = Z_0 whenever alpha_0 = 1.
Scenario make_slln_scenario(const IIDCentered& distribution, double mean, const StepSchedule& schedule,
                            std::uint64_t N, std::uint64_t n_trajectories, std::uint64_t seed, double epsilon);

EnsembleReport slln_scenario(const IIDCentered& distribution, double mean, const StepSchedule& schedule,
                             std::uint64_t N, std::uint64_t n_trajectories, std::uint64_t seed, double epsilon,
                             unsigned parallelism = 1);

unsigned resolve_parallelism(unsigned requested) noexcept;

} // namespace salab
