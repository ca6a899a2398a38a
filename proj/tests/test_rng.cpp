#include <cmath>

#include "doctest.h"
#include "stickytail/rng.hpp"

using namespace stickytail;

TEST_CASE("philox known answers") {
    auto r = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
    CHECK(r == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    r = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(r == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    r = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(r == Philox4x32::Counter{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("gaussian stream moments") {
    GaussianStream g(123, 0);
    const int n = 500000;
    double s1 = 0, s2 = 0, s4 = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
        const auto z = g.next_pair();
        s1 += z[0] + z[1];
        s2 += z[0] * z[0] + z[1] * z[1];
        s4 += std::pow(z[0], 4) + std::pow(z[1], 4);
        cross += z[0] * z[1];
    }
    const double m = 2.0 * n;
    CHECK(std::abs(s1 / m) < 5.0 / std::sqrt(m));
    CHECK(std::abs(s2 / m - 1.0) < 5.0 * std::sqrt(2.0 / m));
    CHECK(std::abs(s4 / m - 3.0) < 5.0 * std::sqrt(96.0 / m));
    CHECK(std::abs(cross / n) < 5.0 / std::sqrt(n));
    CHECK(g.position() == static_cast<std::uint64_t>(n));
}

TEST_CASE("streams are reproducible and distinct") {
    GaussianStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_pair();
        CHECK(x == b.next_pair());
        CHECK(x != c.next_pair());
        CHECK(x != d.next_pair());
    }
    // correlation between adjacent replication streams
    GaussianStream s(99, 0), t(99, 1);
    double cr = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) cr += s.next_pair()[0] * t.next_pair()[0];
    CHECK(std::abs(cr / n) < 5.0 / std::sqrt(n));
}
