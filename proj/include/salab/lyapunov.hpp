#pragma once

#include "salab/linalg.hpp"
#include "salab/noise.hpp"
#include "salab/operators.hpp"
#include "salab/rng.hpp"
#include "salab/schedules.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace salab {

enum class LyapunovKind { WeightedQuadratic, PiecewiseQuadratic, PowerTransform };

/// Lyapunov candidate Phi evaluated on the displacement e = x - x*.
class LyapunovFunction {
public:
    /// Phi(e) = e' P e. Throws InvalidArgument unless P is symmetric positive definite.
    static LyapunovFunction weighted_quadratic(const Matrix& P);
    /// Phi(e) = e' P e when k'e <= 0, e' (P + eta k k') e otherwise.
    static LyapunovFunction piecewise_quadratic(const Matrix& P, double eta, const Vector& k);
    /// P = diag(1, 3), eta = 9, k = e_1.
    static LyapunovFunction standard_piecewise();

    LyapunovKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return static_cast<int>(P_.rows()); }

    double value(const Vector& e) const;
    /// Analytic gradient. On the switching plane of a piecewise quadratic the
    /// k'e <= 0 branch is used.
    Vector gradient(const Vector& e) const;

    /// Degree of homogeneity: 2 for quadratics, p for a power transform.
    double degree() const noexcept { return degree_; }

    /// Exact constants lo, hi with lo |e|^degree <= Phi(e) <= hi |e|^degree.
    std::pair<double, double> sandwich() const noexcept { return sandwich_; }

    const Matrix& P() const noexcept { return P_; }
    double switch_gain() const noexcept { return eta_; }
    const Vector& switch_normal() const noexcept { return k_; }

    friend LyapunovFunction power_transform(const LyapunovFunction& phi, double p, double c1, double c2);

private:
    LyapunovFunction() = default;

    LyapunovKind kind_ = LyapunovKind::WeightedQuadratic;
    Matrix P_;
    double eta_ = 0.0;
    Vector k_;
    std::shared_ptr<const LyapunovFunction> base_;
    double degree_ = 2.0;
    std::pair<double, double> sandwich_{0.0, 0.0};
};

/// Psi = Phi^(p/2) with recorded a1 = c1^(p/2), a2 = c2^(p/2).
/// Throws InvalidArgument unless 1 < p <= 2 and c1, c2 > 0.
LyapunovFunction power_transform(const LyapunovFunction& phi, double p, double c1, double c2);
/// Uses the exact sandwich constants of `phi`.
LyapunovFunction power_transform(const LyapunovFunction& phi, double p);

/// eta_p = (p/2) eta for the power-transformed candidate.
inline double power_drift_constant(double eta, double p) { return 0.5 * p * eta; }

/// Central finite differences with step h = 1e-6 (1 + |e|).
Vector finite_difference_gradient(const LyapunovFunction& phi, const Vector& e);

/// Solves A'P + PA = -Q.
Matrix solve_continuous_lyapunov(const Matrix& A, const Matrix& Q);

struct DriftRegion {
    double r_min = 1e-3;
    double R = 10.0;
};

struct DriftViolation {
    Vector point;
    double margin;  // drift ratio; > 0 means Phi increases along H(x) - x
};

/// Sampling evidence for the negative drift, smoothness and sandwich
/// conditions. It is evidence on the sampled annulus, not a proof.
struct DriftCertificate {
    double eta_hat = 0.0;
    double L2_hat = 0.0;
    double c1_hat = 0.0;
    double c2_hat = 0.0;
    std::vector<DriftViolation> violations;  // first few only
    std::uint64_t violation_count = 0;
    std::uint64_t samples = 0;
    DriftRegion region;

    bool passed() const noexcept { return violation_count == 0 && eta_hat > 0.0; }
};

/// Samples x uniformly in the annulus r_min <= |x - x*| <= R and measures
/// rho(x) = <grad Phi(x - x*), H(x) - x> / Phi(x - x*). eta_hat = -max rho.
/// Throws MissingFixedPoint, DegenerateRegion.
DriftCertificate certify_drift(const Operator& op, const LyapunovFunction& phi, const DriftRegion& region,
                               std::uint64_t n_samples, const RandomStream& stream,
                               std::size_t max_recorded_violations = 32);

/// Uniform point in the annulus around `center`, drawn from `draws`.
Vector sample_annulus(const Vector& center, double r_min, double R, StepDraws& draws);

/// Random symmetric positive definite matrix L L' + 0.1 I, L with N(0,1) entries.
Matrix random_pd_matrix(int dim, StepDraws& draws);

/// Plain quadratic candidates Phi(e) = e'Pe with random PD matrices P.
struct QuadraticSearch {
    std::vector<Matrix> candidates;
    std::vector<std::uint64_t> violation_counts;

    bool every_candidate_violated() const noexcept;
};

/// Certifies each of `n_matrices` random quadratic candidates on
/// `samples_per_matrix` annulus points. Candidate i uses stream ids derived from i.
QuadraticSearch quadratic_violation_search(const Operator& op, int n_matrices, std::uint64_t samples_per_matrix,
                                           const DriftRegion& region, std::uint64_t seed);

struct InequalityGap {
    double gap;    // rhs - lhs
    double scale;  // magnitude of the terms involved
};

/// |v+u|^p <= |v|^p + p <v,u> / |v|^(2-p) + 2^(2-p) |u|^p, p in (1, 2].
/// Throws ZeroBase when v = 0.
InequalityGap norm_power_gap(const Vector& v, const Vector& u, double p);

struct ScalarPowerGaps {
    double lower_gap;
    double upper_gap;
    double scale;
};

/// Two-sided bound on |x+d|^p - |x|^p - p |x|^(p-1) sgn(x) d for p >= 2:
/// lower (p/8)|x|^(p-2) d^2 + |d|^p / 2^(p+1), upper 2p^2 |x|^(p-2) d^2 + p^p |d|^p.
ScalarPowerGaps scalar_power_bounds(double x, double delta, double p);

/// z = clamp(u, D, 2D) - D, with upcrossing counting.
class ProjectionTracker {
public:
    ProjectionTracker(double D, double p, double u0 = 0.0);

    struct Step {
        double z;
        bool upcrossing;
    };

    /// An upcrossing is reported when z reaches D after having been 0 since
    /// the previous upcrossing.
    Step project_track(double u_next);

    double D() const noexcept { return D_; }
    double p() const noexcept { return p_; }
    double z() const noexcept { return z_; }
    std::uint64_t upcrossings() const noexcept { return upcrossings_; }

    static double project(double u, double D) noexcept;

private:
    double D_;
    double p_;
    double z_;
    bool armed_;
    std::uint64_t upcrossings_ = 0;
};

struct ProjectionDriftResult {
    double worst_excess;   // max over states of (E[z_{k+1}^p] - z_k^p) / alpha_k^p
    std::size_t worst_index;
};

/// Exact one-step expectation of z^p over the noise atoms at step k.
/// Throws UnsupportedNoise for infinite-support noise, InvalidArgument unless p > 2.
ProjectionDriftResult check_projection_drift(const Operator& op, const NoiseModel& noise,
                                             const StepSchedule& schedule, double D, double p,
                                             const std::vector<Vector>& states, std::uint64_t k);

struct FourthMomentDecomposition {
    double contraction_term;  // (1-a)^4 x^4
    double second_term;       // 6 (1-a)^2 a^2 x^2 E w^2
    double third_term;        // 4 (1-a) a^3 x E w^3
    double fourth_term;       // a^4 E w^4
    double exact;
    double mc_mean;
    double mc_stderr;

    double z_score() const noexcept;
};

/// E[x'^4 | x] for x' = (1-a) x + a w with two-point noise, term by term,
/// against a Monte Carlo estimate over `draws` samples.
FourthMomentDecomposition fourth_moment_drift_demo(double alpha_k, double x, std::uint64_t draws,
                                                   const RandomStream& stream);

} // namespace salab
