#include "salab/noise.hpp"

#include "salab/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace salab {

namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw Error(ErrorCode::InvalidArgument, what);
}

double two_point_value(bool high) { return high ? 2.0 : -1.0; }
double two_point_prob(bool high) { return high ? 1.0 / 3.0 : 2.0 / 3.0; }

/// Uniform unit vector; a random sign in one dimension.
void random_direction(StepDraws& draws, Vector& out)
{
    if (out.size() == 1) {
        out(0) = draws.uniform() < 0.5 ? -1.0 : 1.0;
        return;
    }
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out(i) = draws.normal();
        norm = out.norm();
    } while (norm == 0.0);
    out /= norm;
}

double student_t_draw(StepDraws& draws, double nu)
{
    // Bailey's polar method.
    double u, w;
    do {
        u = 2.0 * draws.uniform() - 1.0;
        const double v = 2.0 * draws.uniform() - 1.0;
        w = u * u + v * v;
    } while (w >= 1.0 || w == 0.0);
    return u * std::sqrt(nu * (std::pow(w, -2.0 / nu) - 1.0) / w);
}

std::optional<double> iid_norm_moment(const IIDCentered& m, int dim, double q)
{
    switch (m.distribution) {
    case IIDDistribution::Gaussian: return gaussian_norm_moment(m.sigma, dim, q);
    case IIDDistribution::SymmetricPareto: return pareto_abs_moment(m.tail, m.scale, q);
    case IIDDistribution::StudentT: return student_t_abs_moment(m.nu, m.scale, q);
    case IIDDistribution::TwoPoint: break;
    }
    return std::nullopt;  // finite support; handled by enumeration
}

} // namespace

double ThreePointMDS::magnitude(std::uint64_t n) const noexcept
{
    return (4.0 / alpha) * std::pow(static_cast<double>(n) + K, xi);
}

double ThreePointMDS::probability(std::uint64_t n) const noexcept
{
    return c * std::pow(static_cast<double>(n) + K, -xi * p);
}

void ThreePointMDS::validate() const
{
    require(alpha > 0.0 && std::isfinite(alpha), "three_point alpha must be > 0");
    require(K >= 1.0 && std::isfinite(K), "three_point K must be >= 1");
    require(xi > 0.0 && xi <= 1.0, "three_point xi must lie in (0, 1]");
    require(p >= 1.0 && std::isfinite(p), "three_point p must be >= 1");
    require(c > 0.0 && c <= 0.5, "three_point c must lie in (0, 1/2]");
}

void IIDCentered::validate() const
{
    require(p_declared >= 1.0 && std::isfinite(p_declared), "declared p must be >= 1");
    switch (distribution) {
    case IIDDistribution::Gaussian:
        require(sigma > 0.0 && std::isfinite(sigma), "gaussian sigma must be > 0");
        break;
    case IIDDistribution::SymmetricPareto:
        require(tail > 0.0 && std::isfinite(tail), "pareto tail index must be > 0");
        require(scale > 0.0 && std::isfinite(scale), "pareto scale must be > 0");
        require(p_declared < tail, "declared p must be below the pareto tail index");
        break;
    case IIDDistribution::StudentT:
        require(nu > 0.0 && std::isfinite(nu), "student_t nu must be > 0");
        require(scale > 0.0 && std::isfinite(scale), "student_t scale must be > 0");
        require(p_declared < nu, "declared p must be below the student_t degrees of freedom");
        break;
    case IIDDistribution::TwoPoint:
        break;
    }
}

std::optional<double> gaussian_norm_moment(double sigma, int dim, double q)
{
    // |w| / sigma is chi-distributed with dim degrees of freedom.
    return std::pow(sigma, q) * std::pow(2.0, q / 2.0) *
           std::exp(std::lgamma((dim + q) / 2.0) - std::lgamma(dim / 2.0));
}

std::optional<double> pareto_abs_moment(double tail, double scale, double q)
{
    if (q >= tail)
        return std::nullopt;
    return tail * std::pow(scale, q) / (tail - q);
}

std::optional<double> student_t_abs_moment(double nu, double scale, double q)
{
    if (q >= nu)
        return std::nullopt;
    const double log_m = (q / 2.0) * std::log(nu) + std::lgamma((q + 1.0) / 2.0) +
                         std::lgamma((nu - q) / 2.0) - 0.5 * std::log(std::numbers::pi) -
                         std::lgamma(nu / 2.0);
    return std::pow(scale, q) * std::exp(log_m);
}

NoiseModel NoiseModel::zero(int dim)
{
    require(dim >= 1, "noise dimension must be >= 1");
    return NoiseModel(dim, std::monostate{}, MomentBound{2.0, 0.0, 0.0});
}

NoiseModel NoiseModel::three_point(const ThreePointMDS& params, int dim, Vector direction)
{
    params.validate();
    require(dim >= 1, "noise dimension must be >= 1");
    if (direction.size() == 0) {
        direction = Vector::Zero(dim);
        direction(0) = 1.0;
    }
    if (direction.size() != dim)
        throw Error(ErrorCode::DimensionMismatch, "three_point direction has wrong dimension");
    const double norm = direction.norm();
    require(norm > 0.0, "three_point direction must be non-zero");
    NoiseModel m(dim, params, MomentBound{params.p, 2.0 * params.c * std::pow(4.0 / params.alpha, params.p), 0.0});
    m.direction_ = direction / norm;
    return m;
}

NoiseModel NoiseModel::iid(const IIDCentered& params, int dim)
{
    params.validate();
    require(dim >= 1, "noise dimension must be >= 1");
    require(params.distribution != IIDDistribution::TwoPoint || dim <= 16,
            "two_point noise supports at most 16 dimensions");
    NoiseModel m(dim, params, MomentBound{params.p_declared, 0.0, 0.0});
    const auto mp = m.conditional_moment(0, Vector::Zero(dim), params.p_declared);
    m.bound_.A = *mp;
    return m;
}

NoiseModel wrap_multiplicative(const NoiseModel& base, double lambda, const Vector& reference)
{
    require(lambda >= 0.0 && std::isfinite(lambda), "multiplicative lambda must be >= 0");
    if (reference.size() != base.dim())
        throw Error(ErrorCode::DimensionMismatch, "multiplicative reference has wrong dimension");
    const double p = base.declared_bound().p;
    const auto mp = base.conditional_moment(0, reference, p);
    if (!mp) {
        std::ostringstream os;
        os << "base noise has no finite moment of order " << p;
        throw Error(ErrorCode::UnavailableMoment, os.str());
    }
    const double k = std::pow(2.0, p - 1.0);
    MultiplicativeWrap w{std::make_shared<const NoiseModel>(base), lambda, reference};
    return NoiseModel(base.dim(), std::move(w), MomentBound{p, k * *mp, k * std::pow(lambda, p) * *mp});
}

NoiseFamily NoiseModel::family() const noexcept
{
    switch (params_.index()) {
    case 1: return NoiseFamily::ThreePointMDS;
    case 2: return NoiseFamily::IIDCentered;
    case 3: return NoiseFamily::MultiplicativeWrap;
    default: return NoiseFamily::Zero;
    }
}

void NoiseModel::check_dim(const Vector& x) const
{
    if (x.size() != dim_) {
        std::ostringstream os;
        os << "noise expects state of dimension " << dim_ << ", got " << x.size();
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

Vector NoiseModel::sample(std::uint64_t n, const Vector& x, const RandomStream& stream) const
{
    check_dim(x);
    Vector out(dim_);
    StepDraws draws = stream.at(n);
    sample_into(n, x, draws, out);
    return out;
}

void NoiseModel::sample_into(std::uint64_t n, const Vector& x, StepDraws& draws, Vector& out) const
{
    if (const auto* tp = std::get_if<ThreePointMDS>(&params_)) {
        const double u = draws.uniform();
        const double q = tp->probability(n);
        double sign = 0.0;
        if (u < q)
            sign = 1.0;
        else if (u < 2.0 * q)
            sign = -1.0;
        if (sign == 0.0)
            out.setZero();
        else
            out = (sign * tp->magnitude(n)) * direction_;
        return;
    }
    if (const auto* iid = std::get_if<IIDCentered>(&params_)) {
        switch (iid->distribution) {
        case IIDDistribution::Gaussian:
            for (Eigen::Index i = 0; i < out.size(); ++i)
                out(i) = iid->sigma * draws.normal();
            return;
        case IIDDistribution::SymmetricPareto: {
            const double r = iid->scale * std::pow(draws.uniform(), -1.0 / iid->tail);
            random_direction(draws, out);
            out *= r;
            return;
        }
        case IIDDistribution::StudentT: {
            const double r = iid->scale * std::abs(student_t_draw(draws, iid->nu));
            random_direction(draws, out);
            out *= r;
            return;
        }
        case IIDDistribution::TwoPoint:
            for (Eigen::Index i = 0; i < out.size(); ++i)
                out(i) = two_point_value(draws.uniform() < 1.0 / 3.0);
            return;
        }
    }
    if (const auto* mw = std::get_if<MultiplicativeWrap>(&params_)) {
        mw->base->sample_into(n, x, draws, out);
        out *= 1.0 + mw->lambda * (x - mw->reference).norm();
        return;
    }
    out.setZero();
}

std::optional<std::vector<Atom>> NoiseModel::atoms(std::uint64_t n, const Vector& x) const
{
    check_dim(x);
    if (std::holds_alternative<std::monostate>(params_))
        return std::vector<Atom>{{1.0, Vector::Zero(dim_)}};
    if (const auto* tp = std::get_if<ThreePointMDS>(&params_)) {
        const double q = tp->probability(n);
        const double s = tp->magnitude(n);
        return std::vector<Atom>{{q, s * direction_}, {q, -s * direction_}, {1.0 - 2.0 * q, Vector::Zero(dim_)}};
    }
    if (const auto* iid = std::get_if<IIDCentered>(&params_)) {
        if (iid->distribution != IIDDistribution::TwoPoint)
            return std::nullopt;
        std::vector<Atom> out;
        const std::uint32_t count = 1u << dim_;
        out.reserve(count);
        for (std::uint32_t mask = 0; mask < count; ++mask) {
            Atom a{1.0, Vector(dim_)};
            for (int i = 0; i < dim_; ++i) {
                const bool high = (mask >> i) & 1u;
                a.value(i) = two_point_value(high);
                a.probability *= two_point_prob(high);
            }
            out.push_back(std::move(a));
        }
        return out;
    }
    if (const auto* mw = std::get_if<MultiplicativeWrap>(&params_)) {
        auto base = mw->base->atoms(n, x);
        if (!base)
            return std::nullopt;
        const double factor = 1.0 + mw->lambda * (x - mw->reference).norm();
        for (auto& a : *base)
            a.value *= factor;
        return base;
    }
    return std::nullopt;
}

std::optional<double> NoiseModel::conditional_moment(std::uint64_t n, const Vector& x, double q) const
{
    if (!(q >= 1.0))
        throw Error(ErrorCode::InvalidArgument, "moment order must be >= 1");
    check_dim(x);
    if (const auto* tp = std::get_if<ThreePointMDS>(&params_))
        return 2.0 * tp->probability(n) * std::pow(tp->magnitude(n), q);
    if (const auto* iid = std::get_if<IIDCentered>(&params_)) {
        if (iid->distribution != IIDDistribution::TwoPoint)
            return iid_norm_moment(*iid, dim_, q);
    }
    if (const auto* mw = std::get_if<MultiplicativeWrap>(&params_)) {
        const auto m = mw->base->conditional_moment(n, x, q);
        if (!m)
            return std::nullopt;
        return std::pow(1.0 + mw->lambda * (x - mw->reference).norm(), q) * *m;
    }
    const auto at = atoms(n, x);
    double acc = 0.0;
    for (const auto& a : *at)
        acc += a.probability * std::pow(a.value.norm(), q);
    return acc;
}

double NoiseModel::conditional_signed_moment(std::uint64_t n, const Vector& x, int order) const
{
    if (dim_ != 1)
        throw Error(ErrorCode::UnsupportedNoise, "signed moments are defined for scalar noise only");
    const auto at = atoms(n, x);
    if (!at)
        throw Error(ErrorCode::UnsupportedNoise, "signed moments require finite support");
    double acc = 0.0;
    for (const auto& a : *at)
        acc += a.probability * std::pow(a.value(0), order);
    return acc;
}

double expected_jump_count(const ThreePointMDS& model, std::uint64_t N)
{
    if (N < 1)
        throw Error(ErrorCode::InvalidArgument, "expected_jump_count requires N >= 1");
    CompensatedSum acc;
    for (std::uint64_t n = 0; n < N; ++n)
        acc.add(2.0 * model.probability(n));
    return acc.value();
}

} // namespace salab
