#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace salab {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class StepDraws;

/// Counter-based random stream owned by one trajectory.
///
/// The key is derived from (base_seed, stream_id); every draw is addressed by
/// (step index, draw index within the step), so the value of any draw does
/// not depend on how many draws other steps or other streams consumed.
class RandomStream {
public:
    RandomStream(std::uint64_t base_seed, std::uint64_t stream_id) noexcept;

    StepDraws at(std::uint64_t step) const noexcept;

    std::uint64_t base_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return id_; }

private:
    std::uint64_t seed_;
    std::uint64_t id_;
    std::array<std::uint32_t, 2> key_;
};

/// Sequential draws belonging to a single step of a stream.
/// Satisfies UniformRandomBitGenerator.
class StepDraws {
public:
    using result_type = std::uint64_t;

    StepDraws(std::array<std::uint32_t, 2> key, std::uint64_t step) noexcept
        : key_(key), step_(step) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal via Box-Muller; both variates of a pair are used.
    double normal() noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t step_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

} // namespace salab
