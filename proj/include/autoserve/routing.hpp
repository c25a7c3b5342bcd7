#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "autoserve/common.hpp"

namespace autoserve::routing {

class Unreachable : public std::runtime_error
{
public:
    Unreachable(std::uint8_t src, std::uint8_t dst)
        : std::runtime_error("no route from LP " + std::to_string(src) + " to LP " + std::to_string(dst))
    {
    }
};

class UnknownNode : public std::out_of_range
{
public:
    explicit UnknownNode(std::uint8_t id) : std::out_of_range("LP " + std::to_string(id) + " is not in the graph") {}
};

/**
 * LP network graph. Edges are implicit: two LPs are adjacent iff they are within the
 * safe range of each other and the pair is not listed as blocked.
 */
class LpGraph
{
public:
    LpGraph() = default;

    explicit LpGraph(std::vector<LpSite> nodes, std::vector<std::pair<std::uint8_t, std::uint8_t>> blocked = {})
        : nodes_(std::move(nodes))
    {
        std::sort(nodes_.begin(), nodes_.end(), [](const LpSite& a, const LpSite& b) { return a.sys_id < b.sys_id; });
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            if (nodes_[i].sys_id == nodes_[i - 1].sys_id) {
                throw std::invalid_argument("duplicate LP id " + std::to_string(nodes_[i].sys_id));
            }
        }
        for (auto [a, b] : blocked) {
            blocked_.insert(std::minmax(a, b));
        }
    }

    [[nodiscard]] const std::vector<LpSite>& nodes() const { return nodes_; }

    [[nodiscard]] bool contains(std::uint8_t id) const { return index_of(id).has_value(); }

    [[nodiscard]] const LpSite& node(std::uint8_t id) const
    {
        const auto idx = index_of(id);
        if (!idx) {
            throw UnknownNode(id);
        }
        return nodes_[*idx];
    }

    [[nodiscard]] bool has_edge(std::uint8_t a, std::uint8_t b, double safe_range_m) const
    {
        if (a == b || blocked_.contains(std::minmax(a, b))) {
            return false;
        }
        return distance(node(a).position, node(b).position) <= safe_range_m;
    }

    /// Neighbour ids in ascending order.
    [[nodiscard]] std::vector<std::uint8_t> neighbours(std::uint8_t id, double safe_range_m) const
    {
        std::vector<std::uint8_t> out;
        for (const auto& n : nodes_) {
            if (has_edge(id, n.sys_id, safe_range_m)) {
                out.push_back(n.sys_id);
            }
        }
        return out;
    }

private:
    [[nodiscard]] std::optional<std::size_t> index_of(std::uint8_t id) const
    {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                                   [](const LpSite& s, std::uint8_t v) { return s.sys_id < v; });
        if (it == nodes_.end() || it->sys_id != id) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - nodes_.begin());
    }

    std::vector<LpSite> nodes_;
    std::set<std::pair<std::uint8_t, std::uint8_t>> blocked_;
};

/// LPs within `safe_range_m` of `from` (inclusive), nearest first, ties by id.
[[nodiscard]] inline std::vector<std::uint8_t> reachable_lps(const LpGraph& g, Vec2 from, double safe_range_m)
{
    std::vector<std::pair<double, std::uint8_t>> hits;
    for (const auto& n : g.nodes()) {
        const double d = distance(from, n.position);
        if (d <= safe_range_m) {
            hits.emplace_back(d, n.sys_id);
        }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::uint8_t> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        out.push_back(h.second);
    }
    return out;
}

/**
 * Range-bounded route between two LPs.
 *
 * Fewest hops first. Among the fewest-hop routes, the one whose shortest hop is
 * longest (each hop pushed toward the safe-range limit). Remaining ties go to the
 * lexicographically smallest id sequence.
 *
 * BFS from the destination gives hop distances; a backward pass over the BFS layers
 * gives, for every node, the best achievable shortest-hop length to the destination;
 * the route is then read off greedily from the source.
 */
[[nodiscard]] inline std::vector<std::uint8_t> plan_route(const LpGraph& g, std::uint8_t src, std::uint8_t dst,
                                                          double safe_range_m)
{
    if (!g.contains(src)) {
        throw UnknownNode(src);
    }
    if (!g.contains(dst)) {
        throw UnknownNode(dst);
    }
    if (src == dst) {
        return {src};
    }

    std::map<std::uint8_t, int> hops;  // hops to dst
    std::vector<std::uint8_t> order;   // BFS order from dst
    std::deque<std::uint8_t> frontier{dst};
    hops[dst] = 0;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop_front();
        order.push_back(u);
        for (auto v : g.neighbours(u, safe_range_m)) {
            if (!hops.contains(v)) {
                hops[v] = hops[u] + 1;
                frontier.push_back(v);
            }
        }
    }
    if (!hops.contains(src)) {
        throw Unreachable(src, dst);
    }

    auto hop_len = [&](std::uint8_t a, std::uint8_t b) { return distance(g.node(a).position, g.node(b).position); };

    // bottleneck[v]: max over shortest v->dst paths of the minimum hop length.
    std::map<std::uint8_t, double> bottleneck;
    bottleneck[dst] = std::numeric_limits<double>::infinity();
    for (auto u : order) {
        if (u == dst) {
            continue;
        }
        double best = -1.0;
        for (auto w : g.neighbours(u, safe_range_m)) {
            auto it = hops.find(w);
            if (it != hops.end() && it->second == hops[u] - 1) {
                best = std::max(best, std::min(hop_len(u, w), bottleneck[w]));
            }
        }
        bottleneck[u] = best;
    }

    const double target = bottleneck[src];
    std::vector<std::uint8_t> route{src};
    auto at = src;
    while (at != dst) {
        std::optional<std::uint8_t> next;
        for (auto w : g.neighbours(at, safe_range_m)) {
            auto it = hops.find(w);
            if (it != hops.end() && it->second == hops[at] - 1 && hop_len(at, w) >= target &&
                bottleneck[w] >= target) {
                next = w;
                break;  // neighbours are ascending, so this is the smallest id
            }
        }
        at = *next;
        route.push_back(at);
    }
    return route;
}

}  // namespace autoserve::routing
