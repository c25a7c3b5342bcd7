#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "autoserve/common.hpp"

namespace autoserve::sim {

/// Recorded in trace headers; bump if the stream derivation or draw mapping ever changes.
inline constexpr std::string_view RngIdentity = "mt19937_64/splitmix64-streams/u53";

/// SplitMix64 finaliser.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E37'79B9'7F4A'7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58'476D'1CE4'E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D0'49BB'1331'11EBULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under a run seed. Streams are independent of how many exist.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t run_seed, std::uint64_t index)
{
    return splitmix64(splitmix64(run_seed) ^ (index * 0xD1B5'4A32'D192'ED03ULL + 1));
}

/**
 * One reproducible random stream. The engine is std::mt19937_64, whose output
 * sequence is fixed by the standard; the mapping to doubles is done here rather than
 * through std::uniform_real_distribution, whose output is implementation-defined.
 */
class RngStream
{
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 bits of resolution.
    double next_unit()
    {
        ++draws_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi]; exactly `lo` when the interval is degenerate.
    double uniform(double lo, double hi)
    {
        const double u = next_unit();
        return lo == hi ? lo : lo + (hi - lo) * u;
    }

    std::uint64_t draws() const { return draws_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

/// Battery drained in one second of operation. One draw.
[[nodiscard]] inline double sample_consumption(RngStream& rng, double min_pct, double max_pct)
{
    return rng.uniform(min_pct, max_pct);
}

/// Independent per-axis displacement in [-max_step, +max_step]. Two draws.
[[nodiscard]] inline Vec2 sample_displacement(RngStream& rng, double max_step)
{
    const double dx = rng.uniform(-max_step, max_step);
    const double dy = rng.uniform(-max_step, max_step);
    return Vec2{dx, dy};
}

}  // namespace autoserve::sim
