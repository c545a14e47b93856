#include "basinstab/philox.h"

#include "doctest.h"

#include <cmath>
#include <set>

using namespace basinstab;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    constexpr auto zero = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    static_assert(zero[0] == 0x6627e8d5u);
    CHECK(zero == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

    const auto ones = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                           {0xffffffffu, 0xffffffffu});
    CHECK(ones == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});

    const auto pi = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                         {0xa4093822u, 0x299f31d0u});
    CHECK(pi == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform draws lie in [0, 1) and depend on every key part") {
    std::set<double> firsts;
    for (std::uint64_t seed : {1ull, 2ull, 1ull << 40})
        for (std::uint64_t index : {0ull, 1ull, 1ull << 33})
            for (std::uint32_t stream : {0u, 1u, 2u}) {
                CounterRng r(seed, index, stream);
                const double u = r.uniform();
                CHECK(u >= 0.0);
                CHECK(u < 1.0);
                firsts.insert(u);
            }
    CHECK(firsts.size() == 27);
}

TEST_CASE("uniform stream is reproducible and roughly uniform") {
    CounterRng a(5, 17, 2), b(5, 17, 2);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}
