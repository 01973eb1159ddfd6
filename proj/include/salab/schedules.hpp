#pragma once

#include <cstdint>

namespace salab {

enum class ScheduleKind { Polynomial, Constant };

/// Step-size rule alpha * (k + K)^(-xi).
///
/// Constant schedules carry xi = 0 and are kept only for contrast runs.
class StepSchedule {
public:
    static StepSchedule polynomial(double alpha, double K, double xi);
    static StepSchedule constant(double alpha);

    double value(std::uint64_t k) const noexcept;

    double alpha() const noexcept { return alpha_; }
    double K() const noexcept { return K_; }
    double xi() const noexcept { return xi_; }
    ScheduleKind kind() const noexcept { return kind_; }

    /// Same schedule with a different decay exponent.
    StepSchedule with_xi(double xi) const;

    friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

private:
    StepSchedule(double alpha, double K, double xi, ScheduleKind kind)
        : alpha_(alpha), K_(K), xi_(xi), kind_(kind) {}

    double alpha_;
    double K_;
    double xi_;
    ScheduleKind kind_;
};

struct Summability {
    bool sum_divergent;
    bool p_power_summable;
    bool admissible;

    friend bool operator==(const Summability&, const Summability&) = default;
};

/// Decided from the exponents by the p-series test; never by summing.
/// Throws InvalidArgument for p <= 1.
Summability classify_summability(const StepSchedule& schedule, double p);

/// sum_{k<N} value(k)^p, ascending k, compensated.
double partial_p_sum(const StepSchedule& schedule, double p, std::uint64_t N);

/// Integral-test upper bound on the infinite p-power sum:
/// alpha^p * (K^(-s) + K^(1-s)/(s-1)) with s = xi*p > 1.
/// Returns +inf when the series diverges.
double p_sum_upper_bound(const StepSchedule& schedule, double p);

} // namespace salab
