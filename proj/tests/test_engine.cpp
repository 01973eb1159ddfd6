#include "salab/engine.hpp"
#include "salab/error.hpp"
#include "salab/report_io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace salab;
using salab::test::vec;

namespace {

ThreePointMDS counterexample(double xi)
{
    ThreePointMDS m;
    m.alpha = 0.1;
    m.K = 1.0;
    m.xi = xi;
    m.p = 1.6;
    m.c = 0.5;
    return m;
}

Scenario selector_scenario(double xi, std::uint64_t N, std::uint64_t n)
{
    DiagnosticsConfig diag;
    diag.p = 1.6;
    diag.D = 0.5;
    return Scenario{"sel", make_selector_control(), NoiseModel::three_point(counterexample(xi), 2),
                    StepSchedule::polynomial(0.1, 1.0, xi), vec({1.0, 1.0}), N, n, 99, diag};
}

} // namespace

TEST_CASE("checkpoint indices")
{
    const auto one = checkpoint_indices(1);
    CHECK(one == std::vector<std::uint64_t>{0});
    const auto ks = checkpoint_indices(100000);
    CHECK(ks.front() == 0);
    CHECK(ks.back() == 99999);
    for (std::size_t i = 1; i < ks.size(); ++i)
        REQUIRE(ks[i] > ks[i - 1]);
    // 16 per decade: 10^(j/16) for j = 0..79 rounds up to 80 marks, some coincide at small k.
    CHECK(ks.size() > 70);
    CHECK(ks.size() < 85);
    CHECK(std::find(ks.begin(), ks.end(), 10000) != ks.end());
}

TEST_CASE("zero-noise contraction decreases u monotonically")
{
    const Operator op = make_contractive_affine(0.5, vec({1.0, -1.0}));
    DiagnosticsConfig diag;
    const auto rec = run_trajectory(op, NoiseModel::zero(2), StepSchedule::polynomial(0.5, 1, 0.75),
                                    vec({4.0, 4.0}), 5000, diag, RandomStream(1, 0));
    for (std::size_t i = 1; i < rec.checkpoints.size(); ++i)
        REQUIRE(rec.checkpoints[i].u < rec.checkpoints[i - 1].u);
    CHECK(rec.tail_sup < rec.u0);
    CHECK(rec.outcome == Outcome::Converged);
    CHECK(rec.jump_events == 0);
    CHECK(rec.noise_firings == 0);
}

TEST_CASE("one zero-noise step is exactly x + alpha (H(x) - x)")
{
    const Operator op = make_selector_control();
    const StepSchedule sched = StepSchedule::polynomial(0.3, 2.0, 0.9);
    DiagnosticsConfig diag;
    const RandomStream s(4, 4);
    for (std::uint64_t i = 0; i < 200; ++i) {
        StepDraws d = s.at(i);
        const Vector x = vec({4 * d.normal(), 4 * d.normal()});
        const auto rec = run_trajectory(op, NoiseModel::zero(2), sched, x, 1, diag, RandomStream(0, 0));
        const Vector expected = x + sched.value(0) * (op.eval(x) - x);
        for (int j = 0; j < 2; ++j)
            REQUIRE(std::abs(rec.final_state(j) - expected(j)) <= 1e-15 * std::max(1.0, std::abs(expected(j))));
    }
}

TEST_CASE("SLLN identity: 1/(n+1) steps give the running sample mean")
{
    IIDCentered g;
    const StepSchedule harmonic = StepSchedule::polynomial(1.0, 1.0, 1.0);
    const Scenario sc = make_slln_scenario(g, 3.0, harmonic, 10000, 1, 2024, 0.1);
    const RandomStream stream(sc.seed, 0);

    const std::uint64_t N = 10000;
    const auto rec = run_trajectory(sc.op, sc.noise, sc.schedule, sc.x0, N, sc.diagnostics, stream);

    CompensatedSum sum;
    Vector w(1);
    Vector x = sc.x0;
    for (std::uint64_t n = 0; n < N; ++n) {
        StepDraws d = stream.at(n);
        sc.noise.sample_into(n, x, d, w);
        sum.add(3.0 + w(0));
    }
    const double mean = sum.value() / static_cast<double>(N);
    CHECK(std::abs(rec.final_state(0) - mean) <= 1e-12 * std::abs(mean));
}

TEST_CASE("three-point jumps displace by 4 up to the drift term")
{
    const double xi = 0.5;
    const Operator op = make_selector_control();
    const NoiseModel noise = NoiseModel::three_point(counterexample(xi), 2);
    const StepSchedule sched = StepSchedule::polynomial(0.1, 1.0, xi);
    const RandomStream stream(5, 0);
    Vector x = vec({0.3, -0.2});
    Vector hx(2), w(2);
    std::uint64_t firings = 0;
    for (std::uint64_t k = 0; k < 3000; ++k) {
        const double a = sched.value(k);
        op.eval_into(x, hx);
        StepDraws d = stream.at(k);
        noise.sample_into(k, x, d, w);
        const Vector step = a * (hx - x + w);
        if (w.norm() > 0.0) {
            ++firings;
            const double slack = a * (hx - x).norm();
            REQUIRE(step.norm() >= 4.0 - slack - 1e-12);
            REQUIRE(step.norm() <= 4.0 + slack + 1e-12);
        }
        x += step;
        if (x.norm() > 1e100)
            break;
    }
    CHECK(firings > 0);
}

TEST_CASE("jump accounting")
{
    const auto res = run_ensemble(selector_scenario(0.5, 20000, 20), 1);
    for (const auto& r : res.records) {
        CHECK(r.jump_events <= r.noise_firings);
    }
    CHECK(res.report.expected_jump_count);
    CHECK(res.report.mean_jump_events > 0.0);
}

TEST_CASE("non-finite trajectories are recorded, not thrown")
{
    const Operator op = make_hurwitz_linear(-Matrix::Identity(1, 1), Vector::Zero(1));
    DiagnosticsConfig diag;
    const auto rec = run_trajectory(op, NoiseModel::zero(1), StepSchedule::constant(3.0), vec({1.0}), 5000, diag,
                                    RandomStream(1, 1));
    CHECK(rec.outcome == Outcome::NonFinite);
    CHECK(rec.steps_completed < 5000);
    CHECK(std::isinf(rec.tail_sup));

    Scenario sc{"blow", op, NoiseModel::zero(1), StepSchedule::constant(3.0), vec({1.0}), 5000, 3, 1, diag};
    const auto res = run_ensemble(sc, 2);
    CHECK(res.report.nonfinite_count == 3);
    CHECK(res.report.diverged_fraction == 1.0);
}

TEST_CASE("checkpoint values are finite and non-negative")
{
    const auto res = run_ensemble(selector_scenario(1.0, 5000, 8), 1);
    for (const auto& r : res.records) {
        if (r.outcome == Outcome::NonFinite)
            continue;
        for (const auto& c : r.checkpoints) {
            REQUIRE(std::isfinite(c.u));
            REQUIRE(c.u >= 0.0);
        }
        for (const auto& c : r.checkpoints)
            if (c.k >= 5000 - 500 + 1)
                CHECK(r.tail_sup >= c.u);
    }
}

TEST_CASE("single-trajectory ensemble reports that trajectory")
{
    Scenario sc = selector_scenario(0.8, 3000, 1);
    const auto res = run_ensemble(sc, 1);
    REQUIRE(res.records.size() == 1);
    const auto rec = run_trajectory(sc.op, sc.noise, sc.schedule, sc.x0, sc.horizon, sc.diagnostics,
                                    RandomStream(sc.seed, 0));
    CHECK(res.records[0].final_state == rec.final_state);
    CHECK(res.report.tail_sup.q50 == rec.tail_sup);
    CHECK(res.report.mean_jump_events == static_cast<double>(rec.jump_events));
    CHECK(res.report.converged_fraction == (rec.outcome == Outcome::Converged ? 1.0 : 0.0));
}

TEST_CASE("ensembles are identical across thread counts")
{
    const Scenario sc = selector_scenario(0.625, 4000, 12);
    const auto a = run_ensemble(sc, 1);
    const auto b = run_ensemble(sc, 8);
    CHECK(trajectories_csv(a.records) == trajectories_csv(b.records));
    CHECK(to_text(summary_json(a.report)) == to_text(summary_json(b.report)));
    CHECK(u_vs_k_svg(a.report) == u_vs_k_svg(b.report));
}

TEST_CASE("quantiles are monotone")
{
    const Quantiles q = quantiles({5, 1, 4, 2, 3, std::numeric_limits<double>::infinity()});
    CHECK(q.q10 <= q.q25);
    CHECK(q.q25 <= q.q50);
    CHECK(q.q50 <= q.q75);
    CHECK(q.q75 <= q.q90);
    const Quantiles one = quantiles({2.0});
    CHECK(one.q10 == 2.0);
    CHECK(one.q90 == 2.0);
}

TEST_CASE("phase scan reports admissibility and analytic jump counts")
{
    const auto scan = phase_scan(selector_scenario(0.8, 2000, 4), {0.5, 0.625, 0.7, 0.8, 1.0}, 1);
    REQUIRE(scan.rows.size() == 5);
    const bool expected[] = {false, false, true, true, true};
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(scan.rows[i].admissible == expected[i]);
        REQUIRE(scan.rows[i].analytic_jumps);
        CHECK(*scan.rows[i].analytic_jumps
              == doctest::Approx(expected_jump_count(counterexample(scan.rows[i].xi), 2000)));
    }
}

TEST_CASE("SLLN with Gaussian samples concentrates at the CLT rate")
{
    IIDCentered g;
    const auto report = slln_scenario(g, 3.0, StepSchedule::polynomial(1.0, 1.0, 1.0), 1000000, 9, 5, 0.1, 1);
    CHECK(report.final_u.q50 <= 5.0 / std::sqrt(1e6));
}

TEST_CASE("SLLN below the threshold is flagged non-admissible")
{
    IIDCentered par;
    par.distribution = IIDDistribution::SymmetricPareto;
    par.tail = 1.5;
    par.p_declared = 1.4;
    const auto report = slln_scenario(par, 3.0, StepSchedule::polynomial(1.0, 1.0, 0.6), 2000, 2, 5, 0.1, 1);
    REQUIRE(report.admissibility);
    CHECK(!report.admissibility->admissible);
}

TEST_CASE("invalid trajectory arguments")
{
    DiagnosticsConfig diag;
    const Operator op = make_selector_control();
    CHECK_THROWS_AS(run_trajectory(op, NoiseModel::zero(2), StepSchedule::polynomial(1, 1, 1), vec({1, 1}), 0, diag,
                                   RandomStream(0, 0)),
                    Error);
    CHECK_THROWS_AS(run_trajectory(op, NoiseModel::zero(3), StepSchedule::polynomial(1, 1, 1), vec({1, 1}), 10,
                                   diag, RandomStream(0, 0)),
                    Error);
}
