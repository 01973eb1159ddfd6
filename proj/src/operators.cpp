#include "salab/operators.hpp"

#include "salab/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace salab {

const char* to_string(OperatorFamily family)
{
    switch (family) {
    case OperatorFamily::ContractiveAffine: return "contractive";
    case OperatorFamily::HurwitzLinear: return "hurwitz";
    case OperatorFamily::SelectorControl: return "selector_control";
    case OperatorFamily::PLGradient: return "pl_gradient";
    case OperatorFamily::Nonexpansive: return "nonexpansive";
    case OperatorFamily::ConstantMean: return "constant_mean";
    }
    return "unknown";
}

Vector SelectorControlSystem::drift(const Vector& x) const
{
    const double u = std::min(k1.dot(x), k2.dot(x));
    return A * x + B.col(0) * u;
}

SelectorControlSystem SelectorControlSystem::standard()
{
    SelectorControlSystem s;
    s.A.resize(2, 2);
    s.A << -5.0, -4.0,
           -1.0, -2.0;
    s.B.resize(2, 1);
    s.B << -3.0, -21.0;
    s.k1 = Vector::Zero(2);
    s.k1(0) = 1.0;
    s.k2 = Vector::Zero(2);
    return s;
}

double SolutionSet::distance(const Vector& x) const
{
    const Vector r = x - offset;
    if (basis.cols() == 0)
        return r.norm();
    return (r - basis * (basis.transpose() * r)).norm();
}

double QuadraticObjective::value(const Vector& x) const
{
    const Vector e = x - minimizer;
    return 0.5 * e.dot(Q * e);
}

Vector QuadraticObjective::gradient(const Vector& x) const
{
    return Q * (x - minimizer);
}

Operator::Operator(OperatorFamily family, int dim, Map map)
    : family_(family), dim_(dim), map_(std::move(map))
{
    if (dim < 1)
        throw Error(ErrorCode::InvalidArgument, "operator dimension must be >= 1");
}

Vector Operator::eval(const Vector& x) const
{
    if (x.size() != dim_)
        throw Error(ErrorCode::DimensionMismatch, "operator input has wrong dimension");
    Vector out(dim_);
    map_(x, out);
    return out;
}

double Operator::distance_to_solution(const Vector& x) const
{
    if (fixed_point_)
        return (x - *fixed_point_).norm();
    if (solution_set_)
        return solution_set_->distance(x);
    throw Error(ErrorCode::MissingFixedPoint, "operator has neither fixed point nor solution set");
}

Operator& Operator::set_fixed_point(Vector x) { fixed_point_ = std::move(x); return *this; }
Operator& Operator::set_lipschitz(double c) { lipschitz_ = c; return *this; }
Operator& Operator::set_solution_set(SolutionSet s) { solution_set_ = std::move(s); return *this; }
Operator& Operator::set_drift_matrix(Matrix a) { drift_matrix_ = std::move(a); return *this; }
Operator& Operator::set_selector(SelectorControlSystem s) { selector_ = std::move(s); return *this; }
Operator& Operator::set_objective(QuadraticObjective f) { objective_ = std::move(f); return *this; }

Operator make_contractive_affine(double gamma, const Vector& target, const Vector& weights)
{
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw Error(ErrorCode::InvalidArgument, "contraction factor gamma must lie in [0, 1)");
    if (target.size() < 1)
        throw Error(ErrorCode::InvalidArgument, "contraction target must be non-empty");
    if (weights.size() != target.size())
        throw Error(ErrorCode::DimensionMismatch, "weights and target dimensions differ");
    if ((weights.array() <= 0.0).any())
        throw Error(ErrorCode::InvalidArgument, "weights must be strictly positive");

    const int d = static_cast<int>(target.size());
    Operator op(OperatorFamily::ContractiveAffine, d, [gamma, target](const Vector& x, Vector& out) {
        out = gamma * (x - target) + target;
    });
    op.set_fixed_point(target).set_lipschitz(gamma);
    return op;
}

Operator make_contractive_affine(double gamma, const Vector& target)
{
    return make_contractive_affine(gamma, target, Vector::Ones(target.size()));
}

Operator make_hurwitz_linear(const Matrix& A, const Vector& b)
{
    if (A.rows() != A.cols() || A.rows() < 1)
        throw Error(ErrorCode::DimensionMismatch, "A must be square and non-empty");
    if (b.size() != A.rows())
        throw Error(ErrorCode::DimensionMismatch, "b has wrong dimension");

    Eigen::EigenSolver<Matrix> es(A, false);
    const Eigen::VectorXcd eig = es.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        if (eig(i).real() >= -1e-9) {
            std::ostringstream os;
            os << "matrix is not Hurwitz: eigenvalue " << eig(i).real() << (eig(i).imag() >= 0 ? "+" : "")
               << eig(i).imag() << "i";
            throw Error(ErrorCode::NotHurwitz, os.str());
        }
    }
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible())
        throw Error(ErrorCode::Singular, "A is singular");

    const int d = static_cast<int>(A.rows());
    const Matrix M = A + Matrix::Identity(d, d);
    Operator op(OperatorFamily::HurwitzLinear, d, [M, b](const Vector& x, Vector& out) {
        out.noalias() = M * x;
        out += b;
    });
    op.set_fixed_point(-lu.solve(b)).set_lipschitz(spectral_norm(M)).set_drift_matrix(A);
    return op;
}

Operator make_selector_control(const SelectorControlSystem& s)
{
    const Matrix A = s.A;
    const Vector B = s.B.col(0);
    const Vector k1 = s.k1;
    const Vector k2 = s.k2;
    Operator op(OperatorFamily::SelectorControl, 2, [A, B, k1, k2](const Vector& x, Vector& out) {
        const double u = std::min(k1.dot(x), k2.dot(x));
        out.noalias() = A * x;
        out += x + B * u;
    });
    const Matrix I = Matrix::Identity(2, 2);
    op.set_fixed_point(Vector::Zero(2))
        .set_lipschitz(std::max(spectral_norm(I + s.A1()), spectral_norm(I + s.A2())))
        .set_selector(s);
    return op;
}

Operator make_selector_control()
{
    return make_selector_control(SelectorControlSystem::standard());
}

Matrix fixed_rotation(int dim)
{
    Matrix R = Matrix::Identity(dim, dim);
    const double c = std::cos(0.5);
    const double s = std::sin(0.5);
    for (int i = 0; i + 1 < dim; ++i) {
        Matrix G = Matrix::Identity(dim, dim);
        G(i, i) = c;
        G(i, i + 1) = -s;
        G(i + 1, i) = s;
        G(i + 1, i + 1) = c;
        R = G * R;
    }
    return R;
}

Operator make_pl_gradient(PLKind kind, const Vector& spectrum, double step, const Vector& minimizer)
{
    if (spectrum.size() < 1)
        throw Error(ErrorCode::InvalidArgument, "curvature spectrum must be non-empty");
    if (minimizer.size() != spectrum.size())
        throw Error(ErrorCode::DimensionMismatch, "minimizer and spectrum dimensions differ");
    if ((spectrum.array() <= 0.0).any())
        throw Error(ErrorCode::InvalidArgument, "curvature eigenvalues must be > 0");
    const double mu = spectrum.minCoeff();
    const double L = spectrum.maxCoeff();
    if (!(step > 0.0 && step < 2.0 / L)) {
        std::ostringstream os;
        os << "gradient step must lie in (0, 2/L) = (0, " << 2.0 / L << "), got " << step;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }

    const int d = static_cast<int>(spectrum.size());
    Matrix Q = spectrum.asDiagonal();
    if (kind == PLKind::RotatedQuadratic) {
        const Matrix R = fixed_rotation(d);
        Q = R * Q * R.transpose();
        Q = 0.5 * (Q + Q.transpose()).eval();
    }

    Operator op(OperatorFamily::PLGradient, d, [Q, step, minimizer](const Vector& x, Vector& out) {
        out.noalias() = -step * (Q * (x - minimizer));
        out += x;
    });
    double lip = 0.0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i)
        lip = std::max(lip, std::abs(1.0 - step * spectrum(i)));
    op.set_fixed_point(minimizer).set_lipschitz(lip).set_objective({Q, minimizer, mu, L});
    return op;
}

bool pl_inequality_holds(const QuadraticObjective& f, const Vector& x, double rel_tol)
{
    const double lhs = 0.5 * f.gradient(x).squaredNorm();
    const double rhs = f.mu * f.value(x);
    return lhs >= rhs - rel_tol * (std::abs(lhs) + std::abs(rhs));
}

Operator make_nonexpansive(NonexpansiveKind, const Vector& spectrum, double eta)
{
    if (spectrum.size() < 1)
        throw Error(ErrorCode::InvalidArgument, "spectrum must be non-empty");
    if ((spectrum.array() < 0.0).any())
        throw Error(ErrorCode::InvalidArgument, "spectrum must be positive semidefinite");
    const double L = spectrum.maxCoeff();
    if (!(L > 0.0))
        throw Error(ErrorCode::InvalidArgument, "spectrum must have a positive eigenvalue");
    if (!(eta > 0.0 && eta < 2.0 / L)) {
        std::ostringstream os;
        os << "eta must lie in (0, 2/L) = (0, " << 2.0 / L << "), got " << eta;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }

    const int d = static_cast<int>(spectrum.size());
    const Vector scale = (1.0 - eta * spectrum.array()).matrix();
    Operator op(OperatorFamily::Nonexpansive, d, [scale](const Vector& x, Vector& out) {
        out = scale.cwiseProduct(x);
    });

    int null_dim = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        if (spectrum(i) == 0.0)
            ++null_dim;
    SolutionSet set{Vector::Zero(d), Matrix::Zero(d, null_dim)};
    for (Eigen::Index i = 0, j = 0; i < d; ++i)
        if (spectrum(i) == 0.0)
            set.basis(i, j++) = 1.0;

    double lip = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        lip = std::max(lip, std::abs(scale(i)));
    op.set_solution_set(std::move(set)).set_lipschitz(lip);
    op.set_objective({Matrix(spectrum.asDiagonal()), Vector::Zero(d), 0.0, L});
    if (null_dim == 0)
        op.set_fixed_point(Vector::Zero(d));
    return op;
}

Operator make_constant_mean(const Vector& mu)
{
    if (mu.size() < 1)
        throw Error(ErrorCode::InvalidArgument, "mean must be non-empty");
    Operator op(OperatorFamily::ConstantMean, static_cast<int>(mu.size()),
                [mu](const Vector&, Vector& out) { out = mu; });
    op.set_fixed_point(mu).set_lipschitz(0.0);
    return op;
}

} // namespace salab
