#include "salab/error.hpp"
#include "salab/operators.hpp"
#include "salab/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace salab;
using salab::test::mat;
using salab::test::vec;

namespace {

Vector random_point(StepDraws& d, const Vector& center, double radius)
{
    Vector x(center.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = center(i) + radius * (2.0 * d.uniform() - 1.0);
    return x;
}

void check_sampled_lipschitz(const Operator& op, double C)
{
    const Vector center = op.fixed_point() ? *op.fixed_point() : Vector::Zero(op.dim());
    const RandomStream s(5, 0x4c495053);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        StepDraws d = s.at(i);
        const Vector x = random_point(d, center, 10.0);
        const Vector y = random_point(d, center, 10.0);
        REQUIRE((op.eval(x) - op.eval(y)).norm() <= C * (x - y).norm() * (1.0 + 1e-9));
    }
}

void check_fixed_point(const Operator& op)
{
    REQUIRE(op.fixed_point());
    const Vector& xs = *op.fixed_point();
    CHECK((op.eval(xs) - xs).norm() <= 1e-12 * (1.0 + xs.norm()));
}

} // namespace

TEST_CASE("contractive affine examples")
{
    const Vector t = vec({1.5, -2.0});
    const Operator zero = make_contractive_affine(0.0, t);
    CHECK(zero.eval(vec({100, 3})) == t);
    CHECK(zero.eval(vec({-7, 0.25})) == t);

    const Operator half = make_contractive_affine(0.5, Vector::Zero(2));
    CHECK(half.eval(vec({2, 0})) == vec({1, 0}));
    CHECK(*half.lipschitz() == 0.5);
    CHECK(half.family() == OperatorFamily::ContractiveAffine);

    CHECK_THROWS_AS(make_contractive_affine(1.0, t), Error);
    CHECK_THROWS_AS(make_contractive_affine(-0.1, t), Error);
    CHECK_THROWS_AS(make_contractive_affine(0.5, t, vec({1.0, 0.0})), Error);
}

TEST_CASE("hurwitz linear examples")
{
    const Operator neg = make_hurwitz_linear(-Matrix::Identity(3, 3), Vector::Zero(3));
    CHECK(neg.eval(vec({4, -2, 9})).norm() == 0.0);
    CHECK(neg.fixed_point()->norm() == 0.0);

    const Matrix A = mat({{-5, -4}, {-1, -2}});
    const Operator op = make_hurwitz_linear(A, Vector::Zero(2));
    const Eigen::VectorXcd ev = A.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        CHECK(ev(i).real() < 0.0);
    CHECK(A.trace() == doctest::Approx(-7.0));
    CHECK(A.determinant() == doctest::Approx(6.0));

    try {
        make_hurwitz_linear(Matrix::Identity(2, 2), Vector::Zero(2));
        FAIL("identity accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotHurwitz);
    }
}

TEST_CASE("hurwitz fixed point solves A x + b = 0")
{
    const Matrix A = mat({{-5, -4}, {-1, -2}});
    const Vector b = vec({1.0, 2.0});
    const Operator op = make_hurwitz_linear(A, b);
    const Vector& xs = *op.fixed_point();
    CHECK((A * xs + b).norm() <= 1e-10 * b.norm());
    check_fixed_point(op);
    check_sampled_lipschitz(op, *op.lipschitz());
}

TEST_CASE("selector control examples")
{
    const Operator op = make_selector_control();
    CHECK(op.eval(vec({0, 0})).norm() == 0.0);
    CHECK(op.eval(vec({-1, 0})) == vec({7, 22}));
    CHECK(op.eval(vec({1, 0})) == vec({-4, -1}));
    check_fixed_point(op);

    const SelectorControlSystem sys = SelectorControlSystem::standard();
    CHECK(sys.A1() == mat({{-8, -4}, {-22, -2}}));
    CHECK(sys.A2() == mat({{-5, -4}, {-1, -2}}));
    CHECK(sys.k2 == Vector::Zero(2));
}

TEST_CASE("selector control drift is piecewise linear and continuous across the switching plane")
{
    const SelectorControlSystem sys = SelectorControlSystem::standard();
    const Operator op = make_selector_control();
    const RandomStream s(3, 1);
    for (std::uint64_t i = 0; i < 2000; ++i) {
        StepDraws d = s.at(i);
        const Vector x = random_point(d, Vector::Zero(2), 10.0);
        const Vector expected = (x(0) <= 0.0 ? sys.A1() : sys.A2()) * x;
        CHECK((op.eval(x) - x - expected).norm() <= 1e-12 * (1.0 + x.norm()));
    }
    for (double x2 : {-3.0, 0.5, 8.0}) {
        const Vector on = vec({0.0, x2});
        const Vector left = sys.A1() * vec({-1e-12, x2});
        const Vector right = sys.A2() * vec({1e-12, x2});
        CHECK((left - right).norm() < 1e-10);
        CHECK((op.eval(on) - on - sys.A2() * on).norm() < 1e-12);
    }
}

TEST_CASE("selector control drift Lipschitz bound")
{
    const SelectorControlSystem sys = SelectorControlSystem::standard();
    const double C = std::max(spectral_norm(sys.A1()), spectral_norm(sys.A2()));
    const RandomStream s(4, 2);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        StepDraws d = s.at(i);
        const Vector x = random_point(d, Vector::Zero(2), 10.0);
        const Vector y = random_point(d, Vector::Zero(2), 10.0);
        REQUIRE((sys.drift(x) - sys.drift(y)).norm() <= C * (x - y).norm() * (1.0 + 1e-9));
    }
    check_sampled_lipschitz(make_selector_control(), *make_selector_control().lipschitz());
}

TEST_CASE("PL gradient examples")
{
    const Vector xs = vec({2.0, -1.0});
    const Operator exact = make_pl_gradient(PLKind::Quadratic, vec({1.0, 1.0}), 1.0, xs);
    CHECK((exact.eval(vec({7, 7})) - xs).norm() < 1e-15);

    const Operator op = make_pl_gradient(PLKind::Quadratic, vec({1.0, 4.0}), 0.25, xs);
    CHECK((op.eval(xs + vec({1, 1})) - (xs + vec({0.75, 0.0}))).norm() < 1e-15);

    const QuadraticObjective& f = *op.objective();
    const Vector x = xs + vec({1, 0});
    CHECK(0.5 * f.gradient(x).squaredNorm() == doctest::Approx(0.5));
    CHECK(f.mu * (f.value(x) - f.value(xs)) == doctest::Approx(0.5));
    CHECK(pl_inequality_holds(f, x));

    CHECK_THROWS_AS(make_pl_gradient(PLKind::Quadratic, vec({1.0, 4.0}), 0.5, xs), Error);
    CHECK_THROWS_AS(make_pl_gradient(PLKind::Quadratic, vec({0.0, 4.0}), 0.1, xs), Error);
}

TEST_CASE("PL gradient operators satisfy the PL inequality and their Lipschitz bound")
{
    for (PLKind kind : {PLKind::Quadratic, PLKind::RotatedQuadratic}) {
        const Vector xs = vec({1.0, 0.0, -1.0});
        const Operator op = make_pl_gradient(kind, vec({0.5, 1.0, 4.0}), 0.4, xs);
        check_fixed_point(op);
        check_sampled_lipschitz(op, *op.lipschitz());
        const RandomStream s(8, static_cast<std::uint64_t>(kind));
        for (std::uint64_t i = 0; i < 10000; ++i) {
            StepDraws d = s.at(i);
            REQUIRE(pl_inequality_holds(*op.objective(), random_point(d, xs, 10.0)));
        }
    }
    const Matrix R = fixed_rotation(3);
    CHECK((R * R.transpose() - Matrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("nonexpansive examples")
{
    const Operator op = make_nonexpansive(NonexpansiveKind::ConvexGradientStep, vec({1.0, 0.0}), 1.0);
    CHECK(op.eval(vec({3, 5})) == vec({0, 5}));
    CHECK(!op.fixed_point());
    REQUIRE(op.solution_set());
    CHECK(op.distance_to_solution(vec({3, 5})) == doctest::Approx(3.0));
    CHECK(op.distance_to_solution(vec({0, 7})) == 0.0);

    const Vector x = vec({3, 5}), y = vec({1, 2});
    CHECK((op.eval(x) - op.eval(y)).norm() == doctest::Approx(3.0));
    CHECK((op.eval(x) - op.eval(y)).norm() <= (x - y).norm());
    CHECK((op.eval(vec({0, 7})) - vec({0, 7})).norm() == 0.0);

    check_sampled_lipschitz(op, 1.0);
    CHECK_THROWS_AS(make_nonexpansive(NonexpansiveKind::ConvexGradientStep, vec({1.0, 0.0}), 2.0), Error);
    CHECK_THROWS_AS(make_nonexpansive(NonexpansiveKind::ConvexGradientStep, vec({1.0, -1.0}), 0.5), Error);
}

TEST_CASE("constant mean examples")
{
    const Operator zero = make_constant_mean(vec({0.0}));
    CHECK(zero.eval(vec({5.0}))(0) == 0.0);
    const Operator three = make_constant_mean(vec({3.0}));
    CHECK(three.eval(vec({3.0}))(0) == 3.0);
    check_fixed_point(three);
    CHECK(*three.lipschitz() == 0.0);

    // X_{n+1} = X_n + (Z_n - X_n)/(n+1) with Z_n = mu approaches mu monotonically.
    double x = -4.0, prev_gap = 7.0;
    for (int n = 1; n < 200; ++n) {
        x += (three.eval(vec({x}))(0) - x) / (n + 1.0);
        const double gap = std::abs(x - 3.0);
        REQUIRE(gap <= prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.1);
}

TEST_CASE("evaluation rejects wrong dimensions")
{
    const Operator op = make_selector_control();
    try {
        op.eval(vec({1, 2, 3}));
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}
