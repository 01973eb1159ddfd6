#include "salab/error.hpp"
#include "salab/noise.hpp"
#include "salab/schedules.hpp"
#include "test_util.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <cmath>

using namespace salab;
using salab::test::rel_err;
using salab::test::vec;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

ThreePointMDS counterexample(double xi = 0.8, double p = 1.6)
{
    ThreePointMDS m;
    m.alpha = 0.1;
    m.K = 1.0;
    m.xi = xi;
    m.p = p;
    m.c = 0.5;
    return m;
}

// Per-coordinate sample mean within 5 sigma / sqrt(n), sigma from the sample.
void check_zero_mean(const NoiseModel& model, const Vector& x, std::uint64_t n = 1000000)
{
    const RandomStream s(31, 0x6d65616e);
    const int d = model.dim();
    Vector sum = Vector::Zero(d), sum2 = Vector::Zero(d), w(d);
    for (std::uint64_t i = 0; i < n; ++i) {
        StepDraws draws = s.at(i);
        model.sample_into(5, x, draws, w);
        sum += w;
        sum2 += w.cwiseProduct(w);
    }
    const double nn = static_cast<double>(n);
    for (int j = 0; j < d; ++j) {
        const double mean = sum(j) / nn;
        const double sd = std::sqrt(sum2(j) / nn - mean * mean);
        CHECK(std::abs(mean) <= 5.0 * sd / std::sqrt(nn));
    }
}

} // namespace

TEST_CASE("zero model always samples zero")
{
    const NoiseModel z = NoiseModel::zero(3);
    const RandomStream s(1, 1);
    for (std::uint64_t n = 0; n < 100; ++n)
        CHECK(z.sample(n, vec({1, 2, 3}), s).norm() == 0.0);
    CHECK(*z.conditional_moment(0, vec({1, 2, 3}), 2.0) == 0.0);
}

TEST_CASE("three-point construction at n = 0")
{
    const ThreePointMDS m = counterexample();
    CHECK(m.magnitude(0) == doctest::Approx(40.0).epsilon(1e-15));
    CHECK(m.probability(0) == 0.5);
    const NoiseModel model = NoiseModel::three_point(m, 1);
    const auto atoms = *model.atoms(0, vec({0.0}));
    REQUIRE(atoms.size() == 3);
    CHECK(atoms[0].value(0) == doctest::Approx(40.0));
    CHECK(atoms[1].value(0) == doctest::Approx(-40.0));
    CHECK(atoms[0].probability == 0.5);
    CHECK(atoms[1].probability == 0.5);
    CHECK(atoms[2].probability == 0.0);

    int plus = 0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const double w = model.sample(0, vec({0.0}), RandomStream(2, i))(0);
        REQUIRE((w == m.magnitude(0) || w == -m.magnitude(0)));
        plus += w > 0;
    }
    CHECK(std::abs(plus / 20000.0 - 0.5) < 5.0 * 0.5 / std::sqrt(20000.0));
}

TEST_CASE("three-point parameters are validated")
{
    ThreePointMDS m = counterexample();
    m.c = 0.6;
    CHECK_THROWS_AS(m.validate(), Error);
    m = counterexample();
    m.p = 0.9;
    CHECK_THROWS_AS(m.validate(), Error);
    m = counterexample();
    m.p = 1.0;
    CHECK_NOTHROW(m.validate());
    m = counterexample();
    m.K = 0.5;
    CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("finite-support families have exactly zero conditional mean")
{
    const NoiseModel tp = NoiseModel::three_point(counterexample(), 2);
    IIDCentered two;
    two.distribution = IIDDistribution::TwoPoint;
    const NoiseModel tw = NoiseModel::iid(two, 3);
    for (const NoiseModel* m : {&tp, &tw}) {
        for (std::uint64_t n : {0ull, 7ull, 12345ull}) {
            Vector mean = Vector::Zero(m->dim());
            const auto atoms = m->atoms(n, Vector::Zero(m->dim()));
            for (const Atom& a : *atoms)
                mean += a.probability * a.value;
            CHECK(mean.norm() <= 1e-12);
        }
    }
}

TEST_CASE("Monte Carlo mean is zero for every sampled family")
{
    IIDCentered g;
    check_zero_mean(NoiseModel::iid(g, 2), vec({0, 0}));
    IIDCentered par;
    par.distribution = IIDDistribution::SymmetricPareto;
    par.tail = 3.5;
    par.p_declared = 2.0;
    check_zero_mean(NoiseModel::iid(par, 1), vec({0}));
    IIDCentered t;
    t.distribution = IIDDistribution::StudentT;
    t.nu = 5.0;
    t.p_declared = 2.0;
    check_zero_mean(NoiseModel::iid(t, 2), vec({0, 0}));
    IIDCentered two;
    two.distribution = IIDDistribution::TwoPoint;
    check_zero_mean(NoiseModel::iid(two, 1), vec({0}));
    check_zero_mean(NoiseModel::three_point(counterexample(), 1), vec({0}));
    check_zero_mean(wrap_multiplicative(NoiseModel::iid(g, 2), 1.0, Vector::Zero(2)), vec({1.0, 2.0}));
}

TEST_CASE("conditional moment examples")
{
    const ThreePointMDS m = counterexample();
    const NoiseModel model = NoiseModel::three_point(m, 1);
    const double expected = 2.0 * 0.5 * std::pow(40.0, 1.6);
    CHECK(rel_err(*model.conditional_moment(0, vec({0}), 1.6), expected) < 1e-12);

    IIDCentered two;
    two.distribution = IIDDistribution::TwoPoint;
    const NoiseModel tw = NoiseModel::iid(two, 1);
    CHECK(tw.conditional_signed_moment(0, vec({0}), 1) == doctest::Approx(0.0));
    CHECK(tw.conditional_signed_moment(0, vec({0}), 2) == doctest::Approx(2.0));
    CHECK(tw.conditional_signed_moment(0, vec({0}), 3) == doctest::Approx(2.0));
    CHECK(tw.conditional_signed_moment(0, vec({0}), 4) == doctest::Approx(6.0));

    IIDCentered par;
    par.distribution = IIDDistribution::SymmetricPareto;
    par.tail = 1.5;
    par.p_declared = 1.4;
    const NoiseModel pm = NoiseModel::iid(par, 1);
    CHECK(!pm.conditional_moment(0, vec({0}), 2.0));
    CHECK(pm.conditional_moment(0, vec({0}), 1.4));
    CHECK(*pm.conditional_moment(0, vec({0}), 1.4) == doctest::Approx(1.5 / (1.5 - 1.4)));
}

TEST_CASE("closed-form moments agree with Monte Carlo")
{
    IIDCentered g;
    g.sigma = 2.0;
    const NoiseModel gm = NoiseModel::iid(g, 3);
    IIDCentered t;
    t.distribution = IIDDistribution::StudentT;
    t.nu = 6.0;
    t.scale = 0.5;
    t.p_declared = 2.0;
    const NoiseModel tm = NoiseModel::iid(t, 1);
    for (const NoiseModel* m : {&gm, &tm}) {
        const Vector x = Vector::Zero(m->dim());
        const double exact = *m->conditional_moment(0, x, 2.0);
        const RandomStream s(12, 0);
        double sum = 0.0, sum2 = 0.0;
        const int n = 400000;
        for (int i = 0; i < n; ++i) {
            const double v = m->sample(0, x, RandomStream(12, static_cast<std::uint64_t>(i))).squaredNorm();
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sum2 / n - mean * mean) / n);
        CHECK(std::abs(mean - exact) <= 5.0 * se);
    }
}

TEST_CASE("three-point moment is constant in n and alpha_n s_n = 4")
{
    const ThreePointMDS m = counterexample();
    const NoiseModel model = NoiseModel::three_point(m, 1);
    const double m0 = *model.conditional_moment(0, vec({0}), m.p);
    const StepSchedule sched = StepSchedule::polynomial(m.alpha, m.K, m.xi);
    for (std::uint64_t n : {0ull, 10ull, 10000ull}) {
        CHECK(rel_err(*model.conditional_moment(n, vec({0}), m.p), m0) < 1e-12);
        CHECK(rel_err(sched.value(n) * m.magnitude(n), 4.0) < 1e-12);
    }
    for (std::uint64_t n = 0; n < 100000; n += 997)
        REQUIRE(rel_err(sched.value(n) * m.magnitude(n), 4.0) < 1e-12);
}

TEST_CASE("Jensen consistency on finite-support models")
{
    const ThreePointMDS m = counterexample(0.8, 2.5);
    const NoiseModel model = NoiseModel::three_point(m, 1);
    IIDCentered two;
    two.distribution = IIDDistribution::TwoPoint;
    const NoiseModel tw = NoiseModel::iid(two, 2);
    for (std::uint64_t n : {0ull, 50ull, 5000ull}) {
        for (double kappa : {1.0, 1.3, 2.0, 2.4}) {
            const double p = 2.5;
            const double lhs = *model.conditional_moment(n, vec({0}), kappa);
            const double rhs = std::pow(*model.conditional_moment(n, vec({0}), p), kappa / p);
            CHECK(lhs <= rhs * (1.0 + 1e-12));
            const double lhs2 = *tw.conditional_moment(n, Vector::Zero(2), kappa);
            const double rhs2 = std::pow(*tw.conditional_moment(n, Vector::Zero(2), p), kappa / p);
            CHECK(lhs2 <= rhs2 * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("multiplicative wrapper")
{
    IIDCentered g;
    const NoiseModel base = NoiseModel::iid(g, 1);
    const NoiseModel same = wrap_multiplicative(base, 0.0, vec({0}));
    const RandomStream s(77, 4);
    for (std::uint64_t n = 0; n < 50; ++n)
        CHECK(same.sample(n, vec({3.0}), s) == base.sample(n, vec({3.0}), s));

    const NoiseModel wrapped = wrap_multiplicative(base, 1.0, vec({0}));
    const double m2 = *wrapped.conditional_moment(0, vec({1.0}), 2.0);
    CHECK(m2 == doctest::Approx(4.0));
    const MomentBound b = wrapped.declared_bound();
    CHECK(b.p == 2.0);
    CHECK(b.A == doctest::Approx(2.0));
    CHECK(b.B == doctest::Approx(2.0));
    CHECK(m2 <= b.A + b.B * 1.0 + 1e-12);
    for (double r : {0.0, 0.5, 2.0, 10.0})
        CHECK(*wrapped.conditional_moment(0, vec({r}), 2.0) <= b.A + b.B * r * r + 1e-9);

    IIDCentered par;
    par.distribution = IIDDistribution::SymmetricPareto;
    par.tail = 1.5;
    par.p_declared = 1.4;
    try {
        // p_declared < tail keeps the base moment finite, so this one is accepted.
        wrap_multiplicative(NoiseModel::iid(par, 1), 0.5, vec({0}));
    } catch (const Error&) {
        FAIL("finite base moment rejected");
    }
    par.p_declared = 1.6;
    CHECK_THROWS_AS(NoiseModel::iid(par, 1), Error);
}

TEST_CASE("expected jump count")
{
    ThreePointMDS one = counterexample(1.0 / 1.6, 1.6);
    CHECK(expected_jump_count(one, 1) == doctest::Approx(1.0));

    const ThreePointMDS m = counterexample(0.5, 1.6);
    mp exact = 0;
    for (std::uint64_t n = 0; n < 100000; ++n)
        exact += 2 * mp(0.5) * pow(mp(n) + 1, -mp(0.5) * mp(1.6));
    CHECK(rel_err(expected_jump_count(m, 100000), exact.convert_to<double>()) < 1e-9);
    CHECK(expected_jump_count(m, 1000000) > 1.5 * expected_jump_count(m, 100000));
}

TEST_CASE("sampling checks dimensions and is reproducible")
{
    IIDCentered g;
    const NoiseModel m = NoiseModel::iid(g, 2);
    const RandomStream s(5, 5);
    try {
        m.sample(0, vec({1.0}), s);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    for (std::uint64_t n = 0; n < 20; ++n)
        CHECK(m.sample(n, vec({1, 1}), s) == m.sample(n, vec({1, 1}), RandomStream(5, 5)));
}

TEST_CASE("three-point noise fires along the configured direction")
{
    const NoiseModel m = NoiseModel::three_point(counterexample(), 2, vec({3.0, 4.0}));
    CHECK((m.direction() - vec({0.6, 0.8})).norm() < 1e-15);
    const auto atoms = *m.atoms(0, vec({0, 0}));
    CHECK((atoms[0].value - 40.0 * vec({0.6, 0.8})).norm() < 1e-12);
}
