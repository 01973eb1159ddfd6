#include "salab/lyapunov.hpp"

#include "salab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace salab {

namespace {

std::pair<double, double> symmetric_eig_range(const Matrix& M)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

void require_spd(const Matrix& P, const char* name)
{
    if (P.rows() != P.cols() || P.rows() < 1) {
        std::ostringstream os;
        os << name << " must be square and non-empty";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (!P.isApprox(P.transpose(), 1e-12)) {
        std::ostringstream os;
        os << name << " must be symmetric";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (symmetric_eig_range(P).first <= 0.0) {
        std::ostringstream os;
        os << name << " must be positive definite";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

} // namespace

LyapunovFunction LyapunovFunction::weighted_quadratic(const Matrix& P)
{
    require_spd(P, "P");
    LyapunovFunction f;
    f.kind_ = LyapunovKind::WeightedQuadratic;
    f.P_ = 0.5 * (P + P.transpose());
    f.sandwich_ = symmetric_eig_range(f.P_);
    return f;
}

LyapunovFunction LyapunovFunction::piecewise_quadratic(const Matrix& P, double eta, const Vector& k)
{
    require_spd(P, "P");
    if (k.size() != P.rows())
        throw Error(ErrorCode::DimensionMismatch, "switching normal k has wrong dimension");
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw Error(ErrorCode::InvalidArgument, "switching gain eta must be >= 0");
    LyapunovFunction f;
    f.kind_ = LyapunovKind::PiecewiseQuadratic;
    f.P_ = 0.5 * (P + P.transpose());
    f.eta_ = eta;
    f.k_ = k;
    const auto lo = symmetric_eig_range(f.P_);
    const auto hi = symmetric_eig_range(f.P_ + eta * k * k.transpose());
    f.sandwich_ = {std::min(lo.first, hi.first), std::max(lo.second, hi.second)};
    return f;
}

LyapunovFunction LyapunovFunction::standard_piecewise()
{
    Matrix P = Matrix::Zero(2, 2);
    P(0, 0) = 1.0;
    P(1, 1) = 3.0;
    Vector k = Vector::Zero(2);
    k(0) = 1.0;
    return piecewise_quadratic(P, 9.0, k);
}

double LyapunovFunction::value(const Vector& e) const
{
    switch (kind_) {
    case LyapunovKind::WeightedQuadratic:
        return e.dot(P_ * e);
    case LyapunovKind::PiecewiseQuadratic: {
        const double s = k_.dot(e);
        const double v = e.dot(P_ * e);
        return s <= 0.0 ? v : v + eta_ * s * s;
    }
    case LyapunovKind::PowerTransform:
        return std::pow(base_->value(e), 0.5 * degree_);
    }
    return 0.0;
}

Vector LyapunovFunction::gradient(const Vector& e) const
{
    switch (kind_) {
    case LyapunovKind::WeightedQuadratic:
        return 2.0 * (P_ * e);
    case LyapunovKind::PiecewiseQuadratic: {
        const double s = k_.dot(e);
        Vector g = 2.0 * (P_ * e);
        if (s > 0.0)
            g += (2.0 * eta_ * s) * k_;
        return g;
    }
    case LyapunovKind::PowerTransform: {
        const double phi = base_->value(e);
        if (phi <= 0.0)
            return Vector::Zero(e.size());
        const double half = 0.5 * degree_;
        return (half * std::pow(phi, half - 1.0)) * base_->gradient(e);
    }
    }
    return Vector::Zero(e.size());
}

LyapunovFunction power_transform(const LyapunovFunction& phi, double p, double c1, double c2)
{
    if (!(p > 1.0 && p <= 2.0)) {
        std::ostringstream os;
        os << "power transform exponent p must lie in (1, 2], got " << p;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (phi.degree() != 2.0)
        throw Error(ErrorCode::InvalidArgument, "power transform applies to quadratic-type candidates");
    if (!(c1 > 0.0 && c2 >= c1))
        throw Error(ErrorCode::InvalidArgument, "sandwich constants must satisfy 0 < c1 <= c2");
    LyapunovFunction f;
    f.kind_ = LyapunovKind::PowerTransform;
    f.P_ = phi.P_;
    f.base_ = std::make_shared<const LyapunovFunction>(phi);
    f.degree_ = p;
    f.sandwich_ = {std::pow(c1, 0.5 * p), std::pow(c2, 0.5 * p)};
    return f;
}

LyapunovFunction power_transform(const LyapunovFunction& phi, double p)
{
    const auto [c1, c2] = phi.sandwich();
    return power_transform(phi, p, c1, c2);
}

Vector finite_difference_gradient(const LyapunovFunction& phi, const Vector& e)
{
    const double h = 1e-6 * (1.0 + e.norm());
    Vector g(e.size());
    Vector probe = e;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        probe(i) = e(i) + h;
        const double up = phi.value(probe);
        probe(i) = e(i) - h;
        const double down = phi.value(probe);
        probe(i) = e(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

Matrix solve_continuous_lyapunov(const Matrix& A, const Matrix& Q)
{
    if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols())
        throw Error(ErrorCode::DimensionMismatch, "Lyapunov equation operands must be square and equal-sized");
    const Eigen::Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    // vec(A'P + PA) = (I (x) A' + A' (x) I) vec(P), column-major vec.
    Matrix K = Matrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            K.block(i * n, j * n, n, n) += I(i, j) * A.transpose();
            K.block(i * n, j * n, n, n) += A(j, i) * I;
        }
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible())
        throw Error(ErrorCode::Singular, "Lyapunov operator is singular");
    const Vector rhs = -Eigen::Map<const Vector>(Matrix(Q).data(), n * n);
    const Vector vecP = lu.solve(rhs);
    Matrix P = Eigen::Map<const Matrix>(vecP.data(), n, n);
    return 0.5 * (P + P.transpose());
}

Vector sample_annulus(const Vector& center, double r_min, double R, StepDraws& draws)
{
    const auto d = static_cast<double>(center.size());
    Vector dir(center.size());
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < dir.size(); ++i)
            dir(i) = draws.normal();
        norm = dir.norm();
    } while (norm == 0.0);
    const double lo = std::pow(r_min, d);
    const double hi = std::pow(R, d);
    const double r = std::pow(lo + draws.uniform() * (hi - lo), 1.0 / d);
    return center + (r / norm) * dir;
}

Matrix random_pd_matrix(int dim, StepDraws& draws)
{
    Matrix L(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            L(i, j) = draws.normal();
    return L * L.transpose() + 0.1 * Matrix::Identity(dim, dim);
}

DriftCertificate certify_drift(const Operator& op, const LyapunovFunction& phi, const DriftRegion& region,
                               std::uint64_t n_samples, const RandomStream& stream,
                               std::size_t max_recorded_violations)
{
    if (!op.fixed_point())
        throw Error(ErrorCode::MissingFixedPoint, "drift certification needs a known fixed point");
    if (!(region.r_min > 0.0) || !(region.R > region.r_min))
        throw Error(ErrorCode::DegenerateRegion, "sampling region needs 0 < r_min < R");
    if (phi.dim() != op.dim())
        throw Error(ErrorCode::DimensionMismatch, "Lyapunov candidate and operator dimensions differ");

    const Vector& xstar = *op.fixed_point();
    const int d = op.dim();
    static constexpr double kProbeSteps[] = {1e-2, 1e-1, 1.0};

    DriftCertificate cert;
    cert.region = region;
    cert.samples = n_samples;
    double max_ratio = -std::numeric_limits<double>::infinity();
    double c1 = std::numeric_limits<double>::infinity();
    double c2 = 0.0;
    double L2 = 0.0;

    Vector hx(d);
    Vector dir(d);
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        StepDraws draws = stream.at(i);
        const Vector x = sample_annulus(xstar, region.r_min, region.R, draws);
        const Vector e = x - xstar;
        op.eval_into(x, hx);
        const double phi_e = phi.value(e);
        const Vector g = phi.gradient(e);
        const double ratio = g.dot(hx - x) / phi_e;
        max_ratio = std::max(max_ratio, ratio);
        if (ratio >= 0.0) {
            ++cert.violation_count;
            if (cert.violations.size() < max_recorded_violations)
                cert.violations.push_back({x, ratio});
        }

        const double e2 = e.squaredNorm();
        c1 = std::min(c1, phi_e / e2);
        c2 = std::max(c2, phi_e / e2);

        for (Eigen::Index j = 0; j < d; ++j)
            dir(j) = draws.normal();
        dir.normalize();
        for (double h : kProbeSteps) {
            const Vector y = e + h * dir;
            const double q = 2.0 * (phi.value(y) - phi_e - g.dot(y - e)) / (h * h);
            L2 = std::max(L2, q);
        }
    }
    cert.eta_hat = -max_ratio;
    cert.c1_hat = n_samples ? c1 : 0.0;
    cert.c2_hat = c2;
    cert.L2_hat = L2;
    return cert;
}

bool QuadraticSearch::every_candidate_violated() const noexcept
{
    return !violation_counts.empty()
        && std::all_of(violation_counts.begin(), violation_counts.end(), [](std::uint64_t n) { return n > 0; });
}

QuadraticSearch quadratic_violation_search(const Operator& op, int n_matrices, std::uint64_t samples_per_matrix,
                                           const DriftRegion& region, std::uint64_t seed)
{
    if (n_matrices < 1)
        throw Error(ErrorCode::InvalidArgument, "quadratic search needs at least one candidate");
    const RandomStream matrices(seed, 0x71756164ull);
    QuadraticSearch out;
    for (int i = 0; i < n_matrices; ++i) {
        StepDraws d = matrices.at(static_cast<std::uint64_t>(i));
        Matrix P = random_pd_matrix(op.dim(), d);
        const DriftCertificate cert = certify_drift(op, LyapunovFunction::weighted_quadratic(P), region,
                                                    samples_per_matrix,
                                                    RandomStream(seed, 0x71756165ull + static_cast<std::uint64_t>(i)), 0);
        out.candidates.push_back(std::move(P));
        out.violation_counts.push_back(cert.violation_count);
    }
    return out;
}

InequalityGap norm_power_gap(const Vector& v, const Vector& u, double p)
{
    if (!(p > 1.0 && p <= 2.0))
        throw Error(ErrorCode::InvalidArgument, "norm_power_gap requires p in (1, 2]");
    if (v.size() != u.size())
        throw Error(ErrorCode::DimensionMismatch, "v and u dimensions differ");
    const double nv = v.norm();
    if (nv == 0.0)
        throw Error(ErrorCode::ZeroBase, "norm_power_gap requires v != 0");
    const double vp = std::pow(nv, p);
    const double middle = p * v.dot(u) / std::pow(nv, 2.0 - p);
    const double tail = std::pow(2.0, 2.0 - p) * std::pow(u.norm(), p);
    const double rhs = vp + middle + tail;
    const double lhs = std::pow((v + u).norm(), p);
    return {rhs - lhs, vp + std::abs(middle) + tail + lhs};
}

ScalarPowerGaps scalar_power_bounds(double x, double delta, double p)
{
    if (!(p >= 2.0))
        throw Error(ErrorCode::InvalidArgument, "scalar_power_bounds requires p >= 2");
    const double ax = std::abs(x);
    const double ad = std::abs(delta);
    const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    const double lead = std::pow(std::abs(x + delta), p);
    const double base = std::pow(ax, p);
    const double linear = p * std::pow(ax, p - 1.0) * sgn * delta;
    const double center = lead - base - linear;
    // |x|^(p-2) is taken as 0 at x = 0, also for p = 2.
    const double quad = ax > 0.0 ? std::pow(ax, p - 2.0) * delta * delta : 0.0;
    const double dp = std::pow(ad, p);
    const double lower = (p / 8.0) * quad + dp / std::pow(2.0, p + 1.0);
    const double upper = 2.0 * p * p * quad + std::pow(p, p) * dp;
    return {center - lower, upper - center, lead + base + std::abs(linear) + upper};
}

ProjectionTracker::ProjectionTracker(double D, double p, double u0) : D_(D), p_(p)
{
    if (!(D > 0.0) || !std::isfinite(D))
        throw Error(ErrorCode::InvalidArgument, "projection width D must be > 0");
    if (!(p >= 1.0))
        throw Error(ErrorCode::InvalidArgument, "projection power p must be >= 1");
    z_ = project(u0, D_);
    armed_ = z_ == 0.0;
}

double ProjectionTracker::project(double u, double D) noexcept
{
    return std::max(D, std::min(2.0 * D, u)) - D;
}

ProjectionTracker::Step ProjectionTracker::project_track(double u_next)
{
    const double z = project(u_next, D_);
    bool up = false;
    if (z == 0.0) {
        armed_ = true;
    } else if (z >= D_ && armed_ && z_ < D_) {
        up = true;
        armed_ = false;
        ++upcrossings_;
    }
    z_ = z;
    return {z, up};
}

ProjectionDriftResult check_projection_drift(const Operator& op, const NoiseModel& noise,
                                             const StepSchedule& schedule, double D, double p,
                                             const std::vector<Vector>& states, std::uint64_t k)
{
    if (!(p > 2.0))
        throw Error(ErrorCode::InvalidArgument, "projection drift check requires p > 2");
    if (!(D > 0.0))
        throw Error(ErrorCode::InvalidArgument, "projection width D must be > 0");
    if (!op.fixed_point())
        throw Error(ErrorCode::MissingFixedPoint, "projection drift check needs a known fixed point");
    if (noise.dim() != op.dim())
        throw Error(ErrorCode::DimensionMismatch, "noise and operator dimensions differ");

    const Vector& xstar = *op.fixed_point();
    const double a = schedule.value(k);
    const double ap = std::pow(a, p);
    ProjectionDriftResult result{-std::numeric_limits<double>::infinity(), 0};
    Vector hx(op.dim());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Vector& x = states[i];
        const auto at = noise.atoms(k, x);
        if (!at)
            throw Error(ErrorCode::UnsupportedNoise, "projection drift check needs finite-support noise");
        op.eval_into(x, hx);
        const Vector drift = hx - x;
        const double zk = ProjectionTracker::project((x - xstar).norm(), D);
        double expected = 0.0;
        for (const auto& atom : *at) {
            const Vector next = x + a * (drift + atom.value);
            expected += atom.probability * std::pow(ProjectionTracker::project((next - xstar).norm(), D), p);
        }
        const double excess = (expected - std::pow(zk, p)) / ap;
        if (excess > result.worst_excess) {
            result.worst_excess = excess;
            result.worst_index = i;
        }
    }
    return result;
}

double FourthMomentDecomposition::z_score() const noexcept
{
    if (mc_stderr == 0.0)
        return mc_mean == exact ? 0.0 : std::numeric_limits<double>::infinity();
    return (mc_mean - exact) / mc_stderr;
}

FourthMomentDecomposition fourth_moment_drift_demo(double alpha_k, double x, std::uint64_t draws,
                                                   const RandomStream& stream)
{
    if (!(alpha_k > 0.0 && alpha_k <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "step size must lie in (0, 1]");
    if (draws < 2)
        throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs at least two draws");

    IIDCentered spec;
    spec.distribution = IIDDistribution::TwoPoint;
    spec.p_declared = 4.0;
    const NoiseModel w = NoiseModel::iid(spec, 1);
    const Vector x1 = Vector::Constant(1, x);
    const double m2 = w.conditional_signed_moment(0, x1, 2);
    const double m3 = w.conditional_signed_moment(0, x1, 3);
    const double m4 = w.conditional_signed_moment(0, x1, 4);

    const double b = 1.0 - alpha_k;
    FourthMomentDecomposition out{};
    out.contraction_term = std::pow(b, 4) * std::pow(x, 4);
    out.second_term = 6.0 * b * b * alpha_k * alpha_k * x * x * m2;
    out.third_term = 4.0 * b * std::pow(alpha_k, 3) * x * m3;
    out.fourth_term = std::pow(alpha_k, 4) * m4;
    out.exact = out.contraction_term + out.second_term + out.third_term + out.fourth_term;

    // Welford accumulation of x'^4.
    double mean = 0.0;
    double m2acc = 0.0;
    Vector sample(1);
    for (std::uint64_t i = 0; i < draws; ++i) {
        StepDraws d = stream.at(i);
        w.sample_into(i, x1, d, sample);
        const double next = b * x + alpha_k * sample(0);
        const double v = std::pow(next, 4);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2acc += delta * (v - mean);
    }
    out.mc_mean = mean;
    out.mc_stderr = std::sqrt(m2acc / static_cast<double>(draws - 1) / static_cast<double>(draws));
    return out;
}

} // namespace salab
