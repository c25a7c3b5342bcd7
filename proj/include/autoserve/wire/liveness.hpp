#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>

namespace autoserve::wire {

enum class Liveness
{
    Connected,
    Disconnected,
};

/// CONNECTED iff at least `min_count` timestamps fall in (now - window_s, now]. Timestamps sorted ascending.
[[nodiscard]] inline Liveness track_liveness(std::span<const double> heartbeat_times, double now, double window_s,
                                             std::size_t min_count)
{
    const auto lo = std::upper_bound(heartbeat_times.begin(), heartbeat_times.end(), now - window_s);
    const auto hi = std::upper_bound(heartbeat_times.begin(), heartbeat_times.end(), now);
    return static_cast<std::size_t>(hi - lo) >= min_count ? Liveness::Connected : Liveness::Disconnected;
}

/// Per-stream heartbeat history, pruned to the window.
class LivenessTracker
{
public:
    LivenessTracker(double window_s, std::size_t min_count) : window_s_(window_s), min_count_(min_count) {}

    void record(std::uint8_t stream, double t)
    {
        auto& q = streams_[stream];
        if (q.empty() || q.back() <= t) {
            q.push_back(t);
        } else {
            q.insert(std::upper_bound(q.begin(), q.end(), t), t);
        }
    }

    [[nodiscard]] Liveness status(std::uint8_t stream, double now)
    {
        auto it = streams_.find(stream);
        if (it == streams_.end()) {
            return Liveness::Disconnected;
        }
        auto& q = it->second;
        while (!q.empty() && q.front() <= now - window_s_) {
            q.pop_front();
        }
        std::size_t count = 0;
        for (double t : q) {
            if (t <= now) {
                ++count;
            }
        }
        return count >= min_count_ ? Liveness::Connected : Liveness::Disconnected;
    }

    [[nodiscard]] bool known(std::uint8_t stream) const { return streams_.contains(stream); }

    template <class F>
    void for_each_stream(F&& f) const
    {
        for (const auto& [id, q] : streams_) {
            f(id);
        }
    }

private:
    double window_s_;
    std::size_t min_count_;
    std::map<std::uint8_t, std::deque<double>> streams_;
};

}  // namespace autoserve::wire
