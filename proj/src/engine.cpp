#include "salab/engine.hpp"

#include "salab/error.hpp"
#include "salab/lyapunov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace salab {

const char* to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::Converged: return "converged";
    case Outcome::Undecided: return "undecided";
    case Outcome::Diverged: return "diverged";
    case Outcome::NonFinite: return "nonfinite";
    }
    return "unknown";
}

std::vector<std::uint64_t> checkpoint_indices(std::uint64_t N)
{
    std::vector<std::uint64_t> out;
    if (N == 0)
        return out;
    const std::uint64_t last = N - 1;
    out.push_back(0);
    for (int j = 0;; ++j) {
        const double v = std::ceil(std::pow(10.0, j / 16.0) - 1e-9);
        if (v > static_cast<double>(last))
            break;
        const auto k = static_cast<std::uint64_t>(v);
        if (k > out.back())
            out.push_back(k);
    }
    if (last > out.back())
        out.push_back(last);
    return out;
}

TrajectoryRecord run_trajectory(const Operator& op, const NoiseModel& noise, const StepSchedule& schedule,
                                const Vector& x0, std::uint64_t N, const DiagnosticsConfig& diag,
                                const RandomStream& stream)
{
    if (N < 1)
        throw Error(ErrorCode::InvalidArgument, "horizon N must be >= 1");
    if (op.dim() != noise.dim() || x0.size() != op.dim())
        throw Error(ErrorCode::DimensionMismatch, "operator, noise and initial state dimensions differ");
    if (!(diag.tail_fraction > 0.0 && diag.tail_fraction <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "tail_fraction must lie in (0, 1]");

    TrajectoryRecord rec;
    rec.trajectory_id = stream.stream_id();
    rec.u0 = op.distance_to_solution(x0);
    rec.epsilon = diag.epsilon_for(rec.u0);

    const auto marks = checkpoint_indices(N);
    rec.checkpoints.reserve(marks.size());
    std::size_t next_mark = 0;

    const auto tail_len = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(diag.tail_fraction * static_cast<double>(N))));
    const std::uint64_t tail_start = N - tail_len + 1;  // first state index in the tail window
    const double jump_cut = diag.jump_threshold * (1.0 - 1e-9);

    ProjectionTracker tracker(diag.D, std::max(1.0, diag.p), rec.u0);
    const int d = op.dim();
    Vector x = x0;
    Vector hx(d);
    Vector w(d);
    Vector step(d);
    double u = rec.u0;
    bool finite = true;

    for (std::uint64_t k = 0; k < N; ++k) {
        if (next_mark < marks.size() && marks[next_mark] == k) {
            rec.checkpoints.push_back({k, u});
            ++next_mark;
        }
        const double a = schedule.value(k);
        op.eval_into(x, hx);
        StepDraws draws = stream.at(k);
        noise.sample_into(k, x, draws, w);

        const double wnorm = w.norm();
        if (wnorm > 0.0)
            ++rec.noise_firings;
        if (a * wnorm >= jump_cut)
            ++rec.jump_events;

        step = a * (hx - x + w);
        if (step.norm() >= diag.jump_threshold)
            ++rec.large_steps;
        x += step;
        rec.steps_completed = k + 1;

        if (!x.allFinite()) {
            finite = false;
            break;
        }
        u = op.distance_to_solution(x);
        if (!std::isfinite(u)) {
            finite = false;
            break;
        }
        tracker.project_track(u);
        if (k + 1 >= tail_start)
            rec.tail_sup = std::max(rec.tail_sup, u);
    }

    rec.final_state = x;
    rec.upcrossings = tracker.upcrossings();
    if (!finite) {
        rec.tail_sup = std::numeric_limits<double>::infinity();
        rec.final_u = std::numeric_limits<double>::infinity();
        rec.outcome = Outcome::NonFinite;
        return rec;
    }
    rec.final_u = u;
    if (rec.tail_sup <= rec.epsilon)
        rec.outcome = Outcome::Converged;
    else if (rec.tail_sup > diag.divergence_factor * (1.0 + rec.u0))
        rec.outcome = Outcome::Diverged;
    else
        rec.outcome = Outcome::Undecided;
    return rec;
}

Scenario Scenario::with_xi(double xi) const
{
    Scenario s = *this;
    s.schedule = schedule.with_xi(xi);
    if (const auto* tp = noise.three_point_params()) {
        ThreePointMDS params = *tp;
        params.xi = xi;
        s.noise = NoiseModel::three_point(params, noise.dim(), noise.direction());
    }
    return s;
}

Quantiles quantiles(std::vector<double> values)
{
    Quantiles q;
    if (values.empty())
        return q;
    std::sort(values.begin(), values.end());
    const auto at = [&](double level) {
        const double pos = level * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        if (frac == 0.0 || values[lo] == values[hi])
            return values[lo];
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    q.q10 = at(0.10);
    q.q25 = at(0.25);
    q.q50 = at(0.50);
    q.q75 = at(0.75);
    q.q90 = at(0.90);
    return q;
}

EnsembleReport aggregate(const Scenario& scenario, const std::vector<TrajectoryRecord>& records)
{
    EnsembleReport r;
    r.scenario = scenario.name;
    r.operator_family = to_string(scenario.op.family());
    r.n_trajectories = records.size();
    r.horizon = scenario.horizon;
    r.p = scenario.diagnostics.p;
    if (records.empty())
        return r;
    r.epsilon = records.front().epsilon;

    std::vector<double> tails;
    std::vector<double> finals;
    std::uint64_t converged = 0;
    std::uint64_t diverged = 0;
    double jump_sum = 0.0;
    double jump_sq = 0.0;
    double large = 0.0;
    double firings = 0.0;
    double ups = 0.0;
    for (const auto& rec : records) {
        tails.push_back(rec.tail_sup);
        finals.push_back(rec.final_u);
        if (rec.outcome == Outcome::Converged)
            ++converged;
        if (rec.outcome == Outcome::Diverged || rec.outcome == Outcome::NonFinite)
            ++diverged;
        if (rec.outcome == Outcome::NonFinite)
            ++r.nonfinite_count;
        const auto j = static_cast<double>(rec.jump_events);
        jump_sum += j;
        jump_sq += j * j;
        large += static_cast<double>(rec.large_steps);
        firings += static_cast<double>(rec.noise_firings);
        ups += static_cast<double>(rec.upcrossings);
    }
    const auto n = static_cast<double>(records.size());
    r.converged_fraction = static_cast<double>(converged) / n;
    r.diverged_fraction = static_cast<double>(diverged) / n;
    r.tail_sup = quantiles(tails);
    r.final_u = quantiles(finals);
    r.mean_jump_events = jump_sum / n;
    if (records.size() > 1) {
        const double var = std::max(0.0, (jump_sq - n * r.mean_jump_events * r.mean_jump_events) / (n - 1.0));
        r.jump_events_se = std::sqrt(var / n);
    }
    r.mean_large_steps = large / n;
    r.mean_noise_firings = firings / n;
    r.mean_upcrossings = ups / n;

    if (const auto* tp = scenario.noise.three_point_params())
        r.expected_jump_count = expected_jump_count(*tp, scenario.horizon);
    if (r.p > 1.0)
        r.admissibility = classify_summability(scenario.schedule, r.p);

    // Checkpoint indices are shared by all records; a record that went
    // non-finite contributes +inf past its last checkpoint.
    const auto marks = checkpoint_indices(scenario.horizon);
    for (std::size_t m = 0; m < marks.size(); ++m) {
        std::vector<double> us;
        us.reserve(records.size());
        for (const auto& rec : records)
            us.push_back(m < rec.checkpoints.size() ? rec.checkpoints[m].u
                                                    : std::numeric_limits<double>::infinity());
        const Quantiles q = quantiles(std::move(us));
        r.bands.push_back({marks[m], q.q25, q.q50, q.q75});
    }
    return r;
}

unsigned resolve_parallelism(unsigned requested) noexcept
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

EnsembleResult run_ensemble(const Scenario& scenario, unsigned parallelism)
{
    if (scenario.n_trajectories < 1)
        throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one trajectory");
    const std::uint64_t n = scenario.n_trajectories;
    std::vector<TrajectoryRecord> records(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_parallelism(parallelism), n));

    const auto run_one = [&](std::uint64_t i) {
        records[i] = run_trajectory(scenario.op, scenario.noise, scenario.schedule, scenario.x0, scenario.horizon,
                                    scenario.diagnostics, RandomStream(scenario.seed, i));
    };

    if (workers <= 1) {
        for (std::uint64_t i = 0; i < n; ++i)
            run_one(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::uint64_t i = next++; i < n && !failed; i = next++) {
                    try {
                        run_one(i);
                    } catch (...) {
                        if (!failed.exchange(true))
                            failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool)
            th.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    EnsembleResult result;
    result.report = aggregate(scenario, records);
    result.records = std::move(records);
    return result;
}

PhaseScan phase_scan(const Scenario& scenario, const std::vector<double>& xi_list, unsigned parallelism)
{
    if (xi_list.empty())
        throw Error(ErrorCode::InvalidArgument, "phase scan needs at least one xi");
    PhaseScan scan;
    for (double xi : xi_list) {
        const Scenario cell = scenario.with_xi(xi);
        EnsembleResult res = run_ensemble(cell, parallelism);
        PhaseRow row;
        row.xi = xi;
        row.admissible = res.report.admissibility ? res.report.admissibility->admissible : false;
        row.converged_fraction = res.report.converged_fraction;
        row.mean_jumps = res.report.mean_jump_events;
        row.jump_se = res.report.jump_events_se;
        row.analytic_jumps = res.report.expected_jump_count;
        scan.rows.push_back(row);
        scan.cells.push_back(std::move(res));
    }
    return scan;
}

Scenario make_slln_scenario(const IIDCentered& distribution, double mean, const StepSchedule& schedule,
                            std::uint64_t N, std::uint64_t n_trajectories, std::uint64_t seed, double epsilon)
{
    const Vector mu = Vector::Constant(1, mean);
    DiagnosticsConfig diag;
    diag.epsilon = epsilon;
    diag.p = distribution.p_declared;
    diag.jump_threshold = std::numeric_limits<double>::infinity();
    return Scenario{"slln", make_constant_mean(mu), NoiseModel::iid(distribution, 1), schedule, Vector::Zero(1),
                    N, n_trajectories, seed, diag};
}

EnsembleReport slln_scenario(const IIDCentered& distribution, double mean, const StepSchedule& schedule,
                             std::uint64_t N, std::uint64_t n_trajectories, std::uint64_t seed, double epsilon,
                             unsigned parallelism)
{
    return run_ensemble(make_slln_scenario(distribution, mean, schedule, N, n_trajectories, seed, epsilon),
                        parallelism)
        .report;
}

} // namespace salab
