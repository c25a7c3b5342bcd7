#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "autoserve/wire/messages.hpp"

namespace autoserve {

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

[[nodiscard]] inline double distance(Vec2 a, Vec2 b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// A landing platform as known from the static network roster.
struct LpSite
{
    std::uint8_t sys_id = 0;
    Vec2 position;

    bool operator==(const LpSite&) const = default;
};

/// Nearest site to `from` by Euclidean distance, ties by sys_id. Sites for which `skip` returns true are ignored.
[[nodiscard]] inline std::optional<LpSite> nearest_lp(std::span<const LpSite> roster, Vec2 from,
                                                      const std::function<bool(std::uint8_t)>& skip = {})
{
    std::optional<LpSite> best;
    double best_d = 0.0;
    for (const auto& site : roster) {
        if (skip && skip(site.sys_id)) {
            continue;
        }
        const double d = distance(from, site.position);
        if (!best || d < best_d || (d == best_d && site.sys_id < best->sys_id)) {
            best = site;
            best_d = d;
        }
    }
    return best;
}

inline constexpr std::uint8_t BroadcastId = 0;

/// A message addressed to one peer, or to every peer when `to` is BroadcastId.
struct Outbound
{
    std::uint8_t to = BroadcastId;
    wire::Message msg;

    bool operator==(const Outbound&) const = default;
};

/// Optional diagnostic sink for dropped or inconsistent input.
using LogSink = std::function<void(std::string_view)>;

}  // namespace autoserve
