#pragma once

#include "salab/linalg.hpp"

#include <functional>
#include <optional>
#include <string>

namespace salab {

enum class OperatorFamily {
    ContractiveAffine,
    HurwitzLinear,
    SelectorControl,
    PLGradient,
    Nonexpansive,
    ConstantMean,
};

const char* to_string(OperatorFamily family);

/// x' = x + A x + B min{k1'x, k2'x}.
struct SelectorControlSystem {
    Matrix A;  // 2x2
    Matrix B;  // 2x1
    Vector k1;
    Vector k2;

    Matrix A1() const { return A + B * k1.transpose(); }
    Matrix A2() const { return A + B * k2.transpose(); }

    /// Drift f(x) = A x + B min{k1'x, k2'x}.
    Vector drift(const Vector& x) const;

    static SelectorControlSystem standard();
};

/// Affine set offset + span(basis); basis columns are orthonormal.
struct SolutionSet {
    Vector offset;
    Matrix basis;

    double distance(const Vector& x) const;
};

/// Quadratic f(x) = 1/2 (x - x*)' Q (x - x*) underlying a gradient-step operator.
struct QuadraticObjective {
    Matrix Q;
    Vector minimizer;
    double mu = 0.0;  // smallest curvature (PL constant)
    double L = 0.0;   // largest curvature

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
};

/// Evaluation map H : R^d -> R^d with structural metadata.
class Operator {
public:
    using Map = std::function<void(const Vector& x, Vector& out)>;

    Operator(OperatorFamily family, int dim, Map map);

    int dim() const noexcept { return dim_; }
    OperatorFamily family() const noexcept { return family_; }

    Vector eval(const Vector& x) const;
    /// Allocation-free evaluation; `out` must already have size dim().
    void eval_into(const Vector& x, Vector& out) const { map_(x, out); }

    const std::optional<Vector>& fixed_point() const noexcept { return fixed_point_; }
    std::optional<double> lipschitz() const noexcept { return lipschitz_; }
    const std::optional<SolutionSet>& solution_set() const noexcept { return solution_set_; }

    /// Distance to x* if known, else to the recorded solution set.
    double distance_to_solution(const Vector& x) const;

    // Family-specific metadata.
    const std::optional<Matrix>& drift_matrix() const noexcept { return drift_matrix_; }
    const std::optional<SelectorControlSystem>& selector() const noexcept { return selector_; }
    const std::optional<QuadraticObjective>& objective() const noexcept { return objective_; }

    Operator& set_fixed_point(Vector x);
    Operator& set_lipschitz(double c);
    Operator& set_solution_set(SolutionSet s);
    Operator& set_drift_matrix(Matrix a);
    Operator& set_selector(SelectorControlSystem s);
    Operator& set_objective(QuadraticObjective f);

private:
    OperatorFamily family_;
    int dim_;
    Map map_;
    std::optional<Vector> fixed_point_;
    std::optional<double> lipschitz_;
    std::optional<SolutionSet> solution_set_;
    std::optional<Matrix> drift_matrix_;
    std::optional<SelectorControlSystem> selector_;
    std::optional<QuadraticObjective> objective_;
};

/// H(x) = gamma (x - target) + target. `weights` only validates the weighted
/// norm the contraction is stated in; the factor is gamma in every such norm.
Operator make_contractive_affine(double gamma, const Vector& target, const Vector& weights);
Operator make_contractive_affine(double gamma, const Vector& target);

/// H(x) = (A + I) x + b, fixed point -A^{-1} b.
/// Throws NotHurwitz when an eigenvalue has real part >= -1e-9, Singular when
/// A is not invertible.
Operator make_hurwitz_linear(const Matrix& A, const Vector& b);

Operator make_selector_control();
Operator make_selector_control(const SelectorControlSystem& system);

enum class PLKind { Quadratic, RotatedQuadratic };

/// H(x) = x - c grad f(x) for f(x) = 1/2 (x - x*)' Q (x - x*) with spec(Q) = spectrum.
/// RotatedQuadratic conjugates diag(spectrum) by a fixed rotation.
Operator make_pl_gradient(PLKind kind, const Vector& spectrum, double step, const Vector& minimizer);

/// PL inequality |grad f|^2 / 2 >= mu (f - f*) at x, with relative slack.
bool pl_inequality_holds(const QuadraticObjective& f, const Vector& x, double rel_tol = 1e-12);

enum class NonexpansiveKind { ConvexGradientStep };

/// H(x) = x - eta Q x with Q = diag(spectrum) positive semidefinite.
/// Solution set is the null space of Q. Requires 0 < eta < 2/L, L = max spectrum.
Operator make_nonexpansive(NonexpansiveKind kind, const Vector& spectrum, double eta);

/// H(x) = mu for all x.
Operator make_constant_mean(const Vector& mu);

/// Deterministic rotation used by RotatedQuadratic: Givens rotations by
/// 0.5 rad in consecutive coordinate planes.
Matrix fixed_rotation(int dim);

} // namespace salab
