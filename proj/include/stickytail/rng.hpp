#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stickytail {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A (key, counter) pair maps to four independent 32-bit words, so a stream is
/// addressed by key = seed and counter = (step, replication).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Pairs of independent standard normals, one Philox block per pair (Box-Muller).
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    std::array<double, 2> next_pair() {
        const auto w = Philox4x32::apply(
            {static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32), stream_lo_, stream_hi_},
            key_);
        ++index_;
        // 53-bit uniforms; u1 in (0, 1] so the log is finite.
        const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 21) ^ (w[1] >> 11);
        const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 21) ^ (w[3] >> 11);
        const double u1 = (static_cast<double>(a & ((1ULL << 53) - 1)) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(b & ((1ULL << 53) - 1)) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    std::uint64_t position() const noexcept { return index_; }

private:
    Philox4x32::Key key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t index_ = 0;
};

}  // namespace stickytail
