#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al., SC'11).
//
// A draw is a pure function of (key, stream, index), so Monte Carlo runs and
// ensemble placements can be generated in any order or on any thread and
// still reproduce bit-identically.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace repdl {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

/// 64-bit stream addressed by (seed, stream). Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    /// Random access: the index-th 64-bit word of this stream.
    result_type at(std::uint64_t index) const noexcept {
        const std::uint64_t block = index >> 1;
        const PhiloxCounter out = philox4x32_10(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            key_);
        const unsigned lane = static_cast<unsigned>(index & 1u) * 2;
        return (static_cast<std::uint64_t>(out[lane + 1]) << 32) | out[lane];
    }

    result_type operator()() noexcept {
        if ((position_ & 1u) == 0) {
            const std::uint64_t block = position_ >> 1;
            buffer_ = philox4x32_10(
                {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                key_);
        }
        const unsigned lane = static_cast<unsigned>(position_ & 1u) * 2;
        ++position_;
        return (static_cast<std::uint64_t>(buffer_[lane + 1]) << 32) | buffer_[lane];
    }

    std::uint64_t position() const noexcept { return position_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n-1}. Multiply-shift; bias is below n / 2^64.
    std::uint64_t uniform_index(std::uint64_t n) noexcept { return scale_index((*this)(), n); }

    /// Exponential with the given rate by inversion.
    double exponential(double rate) noexcept { return -std::log1p(-uniform01()) / rate; }

    static std::uint64_t scale_index(std::uint64_t word, std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word) * n) >> 64);
    }

private:
    PhiloxKey key_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    PhiloxCounter buffer_{};
};

} // namespace repdl
