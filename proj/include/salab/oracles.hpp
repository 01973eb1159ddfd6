#pragma once

#include "salab/lyapunov.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace salab {

enum class OracleKind { NormPower, ScalarPower, ProjectionDrift, FourthMoment };

/// Parses norm_power | scalar_power | projection_drift | fourth_moment.
OracleKind parse_oracle_kind(const std::string& name);

struct OracleSummary {
    bool passed = false;
    /// Most negative normalized margin seen (gap / scale); >= -tolerance means no violation.
    double worst_margin = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    std::string detail;
};

/// Random (v, u, p) with p in (1, 2], dimensions 1..5, log-uniform scales.
OracleSummary norm_power_oracle(std::uint64_t trials, std::uint64_t seed, double tolerance = 1e-12);

/// Random (x, delta, p) with p in [2, 6], log-uniform magnitudes, both signs.
OracleSummary scalar_power_oracle(std::uint64_t trials, std::uint64_t seed, double tolerance = 1e-12);

struct ProjectionDriftStudy {
    std::vector<std::uint64_t> ks;
    std::vector<double> worst_excess;
    bool bounded = false;  // all finite and max/min within factor 2 (or all <= 0)
};

/// Selector control with three-point noise (alpha 0.1, K 1, xi 0.8, p, c 0.5),
/// `n_states` uniform in the ball of radius 3D, exact atom enumeration at each k.
ProjectionDriftStudy projection_drift_study(double D, double p, const std::vector<std::uint64_t>& ks,
                                            std::uint64_t n_states, std::uint64_t seed);

OracleSummary projection_drift_oracle(std::uint64_t n_states, std::uint64_t seed);

/// alpha_k = 0.1, x = 1, `trials` Monte Carlo draws; passes within 5 sigma
/// when the third-moment term is non-zero.
OracleSummary fourth_moment_oracle(std::uint64_t trials, std::uint64_t seed, FourthMomentDecomposition* out = nullptr);

OracleSummary run_oracle(OracleKind kind, std::uint64_t trials, std::uint64_t seed);

} // namespace salab
