#include "salab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace salab;

TEST_CASE("philox4x32-10 known-answer vectors")
{
    using C = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
          == C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
          == C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("draws are addressed by (seed, stream, step) only")
{
    const RandomStream a(42, 7);
    const RandomStream b(42, 7);
    StepDraws late = a.at(1000);
    StepDraws early = b.at(3);
    for (int i = 0; i < 5; ++i)
        early();
    StepDraws late_again = b.at(1000);
    for (int i = 0; i < 16; ++i)
        CHECK(late() == late_again());

    std::set<std::uint64_t> firsts;
    for (std::uint64_t id = 0; id < 64; ++id)
        firsts.insert(RandomStream(42, id).at(0)());
    CHECK(firsts.size() == 64);
    CHECK(RandomStream(1, 0).at(0)() != RandomStream(2, 0).at(0)());
}

TEST_CASE("uniform lies in the open unit interval and normal has unit variance")
{
    const RandomStream s(9, 1);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        StepDraws d = s.at(static_cast<std::uint64_t>(i));
        const double u = d.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        const double z = d.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
