#pragma once

#include "salab/linalg.hpp"
#include "salab/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace salab {

enum class NoiseFamily { ThreePointMDS, IIDCentered, MultiplicativeWrap, Zero };

/// Three-atom martingale difference noise tied to a step schedule:
/// +-s_n with probability q_n each, 0 otherwise, where
/// s_n = (4/alpha)(n+K)^xi and q_n = c (n+K)^(-xi p).
struct ThreePointMDS {
    double alpha = 1.0;
    double K = 1.0;
    double xi = 1.0;
    double p = 2.0;
    double c = 0.5;

    double magnitude(std::uint64_t n) const noexcept;    // s_n
    double probability(std::uint64_t n) const noexcept;  // q_n

    /// Throws InvalidArgument unless alpha > 0, K >= 1, xi in (0,1], p >= 1, c in (0, 1/2].
    void validate() const;
};

enum class IIDDistribution { Gaussian, SymmetricPareto, StudentT, TwoPoint };

/// Mean-zero i.i.d. noise.
///
/// Gaussian is isotropic N(0, sigma^2 I). SymmetricPareto and StudentT are
/// radially symmetric: the norm follows the scalar |.| law and the direction
/// is uniform (a random sign when dim = 1). TwoPoint draws each coordinate
/// independently from {2 w.p. 1/3, -1 w.p. 2/3}.
struct IIDCentered {
    IIDDistribution distribution = IIDDistribution::Gaussian;
    double sigma = 1.0;   // Gaussian
    double tail = 2.0;    // Pareto tail index a
    double nu = 3.0;      // Student-t degrees of freedom
    double scale = 1.0;   // Pareto / Student-t scale
    double p_declared = 2.0;

    void validate() const;
};

class NoiseModel;

struct MultiplicativeWrap {
    std::shared_ptr<const NoiseModel> base;
    double lambda = 0.0;
    Vector reference;  // x* used in |x - x*|
};

/// Declared constants of E[|w|^p | x] <= A + B |x - x*|^p.
struct MomentBound {
    double p;
    double A;
    double B;
};

struct Atom {
    double probability;
    Vector value;
};

/// Conditional law of w_n given x_n.
class NoiseModel {
public:
    static NoiseModel zero(int dim);
    /// Scalar construction embedded along `direction` (normalized; default e_1).
    static NoiseModel three_point(const ThreePointMDS& params, int dim, Vector direction = {});
    static NoiseModel iid(const IIDCentered& params, int dim);

    int dim() const noexcept { return dim_; }
    NoiseFamily family() const noexcept;

    const ThreePointMDS* three_point_params() const noexcept { return std::get_if<ThreePointMDS>(&params_); }
    const IIDCentered* iid_params() const noexcept { return std::get_if<IIDCentered>(&params_); }
    const MultiplicativeWrap* multiplicative_params() const noexcept
    {
        return std::get_if<MultiplicativeWrap>(&params_);
    }
    const Vector& direction() const noexcept { return direction_; }
    const MomentBound& declared_bound() const noexcept { return bound_; }

    /// Draw w_n given x_n. Deterministic in (stream key, n, x).
    Vector sample(std::uint64_t n, const Vector& x, const RandomStream& stream) const;
    /// Draw from an already-positioned step sub-stream into `out` (size dim()).
    void sample_into(std::uint64_t n, const Vector& x, StepDraws& draws, Vector& out) const;

    /// E[|w_n|^q | x_n]; nullopt when the moment is infinite.
    std::optional<double> conditional_moment(std::uint64_t n, const Vector& x, double q) const;

    /// E[w_n^order | x_n] for one-dimensional finite-support models.
    /// Throws UnsupportedNoise otherwise.
    double conditional_signed_moment(std::uint64_t n, const Vector& x, int order) const;

    /// Atoms of the conditional law, or nullopt for infinite support.
    std::optional<std::vector<Atom>> atoms(std::uint64_t n, const Vector& x) const;

    friend NoiseModel wrap_multiplicative(const NoiseModel& base, double lambda, const Vector& reference);

private:
    using Params = std::variant<std::monostate, ThreePointMDS, IIDCentered, MultiplicativeWrap>;

    NoiseModel(int dim, Params params, MomentBound bound)
        : dim_(dim), params_(std::move(params)), bound_(bound) {}

    void check_dim(const Vector& x) const;

    int dim_;
    Params params_;
    MomentBound bound_;
    Vector direction_;
};

/// w = (1 + lambda |x - reference|) * zeta, zeta ~ base.
/// Declared A_p = 2^(p-1) m_p, B_p = 2^(p-1) lambda^p m_p where m_p is the
/// base's p-th moment at its declared p. Throws UnavailableMoment when m_p is infinite.
NoiseModel wrap_multiplicative(const NoiseModel& base, double lambda, const Vector& reference);

/// sum_{n<N} 2 q_n: expected number of non-zero firings before N.
double expected_jump_count(const ThreePointMDS& model, std::uint64_t N);

/// E|X|^q for the scalar building blocks; nullopt when infinite.
std::optional<double> gaussian_norm_moment(double sigma, int dim, double q);
std::optional<double> pareto_abs_moment(double tail, double scale, double q);
std::optional<double> student_t_abs_moment(double nu, double scale, double q);

} // namespace salab
