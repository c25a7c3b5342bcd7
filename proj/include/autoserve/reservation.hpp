#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace autoserve {

struct Reservation
{
    std::uint8_t ap_sys_id = 0;
    int priority = 0;  // 0..100, higher is more urgent
    double requested_at = 0.0;

    bool operator==(const Reservation&) const = default;
};

/// Maps remaining battery to request priority: round(100 - battery), clamped to 0..100.
[[nodiscard]] inline int priority_for_battery(double battery_pct)
{
    const double p = std::clamp(100.0 - battery_pct, 0.0, 100.0);
    return static_cast<int>(std::lround(p));
}

class DuplicateReservation : public std::logic_error
{
public:
    explicit DuplicateReservation(std::uint8_t ap)
        : std::logic_error("AP " + std::to_string(ap) + " already holds a reservation")
    {
    }
};

class EmptyQueue : public std::logic_error
{
public:
    EmptyQueue() : std::logic_error("service queue is empty") {}
};

/**
 * Priority-ordered service ledger held by a landing platform.
 *
 * Order is priority descending, then requested_at ascending, then ap_sys_id
 * ascending. Position 0 is served next. At most one reservation per AP.
 */
class ServiceQueue
{
public:
    /// Strict weak order over reservations; true if `a` is served before `b`.
    [[nodiscard]] static bool served_before(const Reservation& a, const Reservation& b)
    {
        if (a.priority != b.priority) {
            return a.priority > b.priority;
        }
        if (a.requested_at != b.requested_at) {
            return a.requested_at < b.requested_at;
        }
        return a.ap_sys_id < b.ap_sys_id;
    }

    std::size_t enqueue(const Reservation& r)
    {
        if (contains(r.ap_sys_id)) {
            throw DuplicateReservation(r.ap_sys_id);
        }
        auto it = std::upper_bound(items_.begin(), items_.end(), r, served_before);
        const auto pos = static_cast<std::size_t>(it - items_.begin());
        items_.insert(it, r);
        return pos;
    }

    bool cancel(std::uint8_t ap_sys_id)
    {
        auto it = find(ap_sys_id);
        if (it == items_.end()) {
            return false;
        }
        items_.erase(it);
        return true;
    }

    Reservation pop_next()
    {
        if (items_.empty()) {
            throw EmptyQueue();
        }
        Reservation head = items_.front();
        items_.erase(items_.begin());
        return head;
    }

    [[nodiscard]] std::optional<std::size_t> position_of(std::uint8_t ap_sys_id) const
    {
        auto it = find(ap_sys_id);
        if (it == items_.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - items_.begin());
    }

    [[nodiscard]] bool contains(std::uint8_t ap_sys_id) const { return find(ap_sys_id) != items_.end(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] const Reservation& front() const
    {
        if (items_.empty()) {
            throw EmptyQueue();
        }
        return items_.front();
    }
    [[nodiscard]] const std::vector<Reservation>& items() const { return items_; }

    bool operator==(const ServiceQueue&) const = default;

private:
    [[nodiscard]] std::vector<Reservation>::const_iterator find(std::uint8_t ap_sys_id) const
    {
        return std::find_if(items_.begin(), items_.end(),
                            [ap_sys_id](const Reservation& r) { return r.ap_sys_id == ap_sys_id; });
    }

    std::vector<Reservation> items_;
};

}  // namespace autoserve
