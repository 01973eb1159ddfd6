#include "salab/schedules.hpp"

#include "salab/error.hpp"
#include "salab/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace salab {

StepSchedule StepSchedule::polynomial(double alpha, double K, double xi)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::InvalidArgument, "schedule alpha must be > 0");
    if (!(K >= 1.0) || !std::isfinite(K))
        throw Error(ErrorCode::InvalidArgument, "schedule K must be >= 1");
    if (!(xi > 0.0 && xi <= 1.0)) {
        std::ostringstream os;
        os << "schedule xi must lie in (0, 1], got " << xi;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    return StepSchedule(alpha, K, xi, ScheduleKind::Polynomial);
}

StepSchedule StepSchedule::constant(double alpha)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::InvalidArgument, "schedule alpha must be > 0");
    return StepSchedule(alpha, 1.0, 0.0, ScheduleKind::Constant);
}

StepSchedule StepSchedule::with_xi(double xi) const
{
    if (kind_ == ScheduleKind::Constant)
        throw Error(ErrorCode::InvalidArgument, "constant schedule has no decay exponent");
    return polynomial(alpha_, K_, xi);
}

double StepSchedule::value(std::uint64_t k) const noexcept
{
    if (kind_ == ScheduleKind::Constant)
        return alpha_;
    return alpha_ * std::pow(static_cast<double>(k) + K_, -xi_);
}

Summability classify_summability(const StepSchedule& schedule, double p)
{
    if (!(p > 1.0))
        throw Error(ErrorCode::InvalidArgument, "summability requires p > 1");
    if (schedule.kind() == ScheduleKind::Constant)
        return {true, false, false};
    const bool divergent = schedule.xi() <= 1.0;
    const bool summable = schedule.xi() * p > 1.0;
    return {divergent, summable, divergent && summable};
}

double partial_p_sum(const StepSchedule& schedule, double p, std::uint64_t N)
{
    if (N < 1)
        throw Error(ErrorCode::InvalidArgument, "partial_p_sum requires N >= 1");
    CompensatedSum acc;
    for (std::uint64_t k = 0; k < N; ++k)
        acc.add(std::pow(schedule.value(k), p));
    return acc.value();
}

double p_sum_upper_bound(const StepSchedule& schedule, double p)
{
    if (schedule.kind() == ScheduleKind::Constant)
        return std::numeric_limits<double>::infinity();
    const double s = schedule.xi() * p;
    if (s <= 1.0)
        return std::numeric_limits<double>::infinity();
    const double K = schedule.K();
    return std::pow(schedule.alpha(), p) * (std::pow(K, -s) + std::pow(K, 1.0 - s) / (s - 1.0));
}

} // namespace salab
