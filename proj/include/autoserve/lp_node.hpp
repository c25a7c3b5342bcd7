#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoserve/common.hpp"
#include "autoserve/node_state.hpp"
#include "autoserve/reservation.hpp"
#include "autoserve/wire/liveness.hpp"
#include "autoserve/wire/messages.hpp"

namespace autoserve {

/// Landing-platform phases. Values are the shared NodeState codes.
enum class LpState : std::uint8_t
{
    Idle = static_cast<std::uint8_t>(NodeState::Idle),
    AwaitingBoarding = static_cast<std::uint8_t>(NodeState::AwaitingBoarding),
    Aligning = static_cast<std::uint8_t>(NodeState::Aligning),
    Servicing = static_cast<std::uint8_t>(NodeState::Servicing),
    Releasing = static_cast<std::uint8_t>(NodeState::Releasing),
};

[[nodiscard]] constexpr NodeState to_node_state(LpState s) { return static_cast<NodeState>(s); }
[[nodiscard]] constexpr std::string_view to_string(LpState s) { return to_string(to_node_state(s)); }

[[nodiscard]] constexpr bool is_legal_transition(LpState from, LpState to)
{
    switch (from) {
    case LpState::Idle: return to == LpState::AwaitingBoarding;
    // Cancel or boarding timeout sends an awaited AP's slot back to idle.
    case LpState::AwaitingBoarding: return to == LpState::Aligning || to == LpState::Idle;
    case LpState::Aligning: return to == LpState::Servicing;
    case LpState::Servicing: return to == LpState::Releasing;
    case LpState::Releasing: return to == LpState::Idle;
    }
    return false;
}

struct LpConfig
{
    std::uint8_t sys_id = 1;
    std::uint8_t comp_id = 1;
    Vec2 position;
    double service_duration_s = 120.0;
    double alignment_duration_s = 10.0;
    double boarding_timeout_s = 180.0;
    double critical_threshold_pct = 15.0;
    double heartbeat_period_s = 1.0;
    double liveness_window_s = 5.0;
    std::size_t liveness_min_count = 3;
    /// Every LP in the network, this one included. Used for the nearest-LP test.
    std::vector<LpSite> roster;
};

/// Last health report received from an AP.
struct ApHealth
{
    double battery_pct = 0.0;
    Vec2 position;
    NodeState state = NodeState::Operating;
    double received_at = 0.0;
};

/**
 * The landing platform's control loop. Request intake runs in every state; the
 * landing / alignment / service / release sequence runs for one AP at a time.
 *
 * The AP being boarded or serviced is taken out of the queue and held as the
 * current AP. Queue positions reported to peers count that slot as position 0, so
 * a confirmation carries position 0 only when the recipient should start boarding.
 */
class LpNode
{
public:
    using TransitionObserver = std::function<void(LpState from, LpState to, double now)>;

    explicit LpNode(LpConfig cfg)
        : cfg_(std::move(cfg))
        , liveness_(cfg_.liveness_window_s, cfg_.liveness_min_count)
    {
        if (cfg_.sys_id == 0) {
            throw std::invalid_argument("LP sys_id must be non-zero");
        }
        if (cfg_.roster.empty()) {
            cfg_.roster.push_back(LpSite{cfg_.sys_id, cfg_.position});
        }
    }

    std::vector<Outbound> handle_message(std::uint8_t from, const wire::Message& msg, double now)
    {
        std::vector<Outbound> out;
        std::visit([&](const auto& m) { on(from, m, now, out); }, msg);
        return out;
    }

    std::vector<Outbound> tick(double now)
    {
        std::vector<Outbound> out;
        if (state_ == LpState::Aligning && now - phase_started_ >= cfg_.alignment_duration_s) {
            transition(LpState::Servicing, now);
            out.push_back({*current_ap_, wire::SystemStateUpdate{NodeState::Servicing}});
        }
        if (state_ == LpState::Servicing && now - phase_started_ >= cfg_.service_duration_s) {
            transition(LpState::Releasing, now);
            out.push_back({*current_ap_, wire::SystemStateUpdate{NodeState::ServiceComplete}});
        }
        if (state_ == LpState::AwaitingBoarding && now - phase_started_ >= cfg_.boarding_timeout_s) {
            log("boarding timeout for AP " + std::to_string(*current_ap_));
            ++boarding_timeouts_;
            current_ap_.reset();
            transition(LpState::Idle, now);
            promote_next(now, out);
        }
        if (!last_heartbeat_ || now - *last_heartbeat_ >= cfg_.heartbeat_period_s) {
            last_heartbeat_ = now;
            out.push_back({BroadcastId, heartbeat()});
        }
        liveness_.for_each_stream([&](std::uint8_t ap) { connection_[ap] = liveness_.status(ap, now); });
        return out;
    }

    /**
     * Critical-health reservation: an AP below the critical threshold for which this
     * LP is the nearest one is queued at priority 100 without asking.
     */
    std::optional<Reservation> auto_reserve(std::uint8_t ap, const wire::ExtendedHeartbeat& hb, double now)
    {
        if (hb.battery_pct() >= cfg_.critical_threshold_pct) {
            return std::nullopt;
        }
        const auto nearest = nearest_lp(cfg_.roster, Vec2{hb.pos_x, hb.pos_y});
        if (!nearest || nearest->sys_id != cfg_.sys_id) {
            return std::nullopt;
        }
        if (holds(ap)) {
            return std::nullopt;
        }
        Reservation r{ap, 100, now};
        queue_.enqueue(r);
        ++auto_reservations_;
        return r;
    }
    /// Position as reported on the wire: 0 for the current AP, else the queue index (+1 while the LP is busy).
    /// Position as reported on the wire: 0 for the current AP, queue index + 1 behind it.
    [[nodiscard]] std::optional<std::size_t> reported_position(std::uint8_t ap) const
    {
        if (current_ap_ == ap) {
            return 0;
        }
        auto pos = queue_.position_of(ap);
        if (!pos) {
            return std::nullopt;
        }
        return *pos + (state_ == LpState::Idle ? 0 : 1);
    }

    /// True if `ap` is queued here or is the current AP.
    [[nodiscard]] bool holds(std::uint8_t ap) const { return current_ap_ == ap || queue_.contains(ap); }

    [[nodiscard]] LpState state() const { return state_; }
    [[nodiscard]] std::optional<std::uint8_t> current_ap() const { return current_ap_; }
    [[nodiscard]] const ServiceQueue& queue() const { return queue_; }
    [[nodiscard]] const LpConfig& config() const { return cfg_; }
    [[nodiscard]] std::uint8_t sys_id() const { return cfg_.sys_id; }
    [[nodiscard]] std::size_t services_completed() const { return services_completed_; }
    [[nodiscard]] std::size_t boarding_timeouts() const { return boarding_timeouts_; }
    [[nodiscard]] std::size_t auto_reservations() const { return auto_reservations_; }
    [[nodiscard]] std::size_t dropped_messages() const { return dropped_; }
    [[nodiscard]] const std::map<std::uint8_t, ApHealth>& health() const { return health_; }

    [[nodiscard]] wire::Liveness connection(std::uint8_t ap) const
    {
        auto it = connection_.find(ap);
        return it == connection_.end() ? wire::Liveness::Disconnected : it->second;
    }

    void set_observer(TransitionObserver obs) { observer_ = std::move(obs); }
    void set_log(LogSink sink) { log_ = std::move(sink); }

private:
    void on(std::uint8_t from, const wire::ServiceReservationRequest& req, double now, std::vector<Outbound>& out)
    {
        if (req.target_lp_sys_id != cfg_.sys_id) {
            drop("request addressed to LP " + std::to_string(req.target_lp_sys_id));
            return;
        }
        if (!holds(from)) {
            queue_.enqueue(Reservation{from, req.priority, now});
        }
        // A promotion straight to the head already carries this AP's confirmation.
        if (promote_next(now, out) == from) {
            return;
        }
        out.push_back({from, confirmation_for(from)});
    }

    void on(std::uint8_t from, const wire::ApReservationDecision& dec, double now, std::vector<Outbound>& out)
    {
        if (dec.target_lp_sys_id != cfg_.sys_id) {
            drop("decision addressed to LP " + std::to_string(dec.target_lp_sys_id));
            return;
        }
        if (dec.decision == wire::Decision::Keep) {
            return;
        }
        if (current_ap_ == from) {
            if (state_ != LpState::AwaitingBoarding) {
                drop("cancel from AP " + std::to_string(from) + " after it landed");
                return;
            }
            current_ap_.reset();
            transition(LpState::Idle, now);
            promote_next(now, out);
            return;
        }
        if (!queue_.cancel(from)) {
            drop("cancel for unknown reservation of AP " + std::to_string(from));
        }
    }

    void on(std::uint8_t from, const wire::SystemStateUpdate& upd, double now, std::vector<Outbound>& out)
    {
        if (current_ap_ != from) {
            drop(std::string(to_string(upd.state)) + " from AP " + std::to_string(from) + " which is not current");
            return;
        }
        if (upd.state == NodeState::Landed && state_ == LpState::AwaitingBoarding) {
            transition(LpState::Aligning, now);
            return;
        }
        if (upd.state == NodeState::Departed && state_ == LpState::Releasing) {
            ++services_completed_;
            current_ap_.reset();
            transition(LpState::Idle, now);
            promote_next(now, out);
            return;
        }
        drop(std::string(to_string(upd.state)) + " while " + std::string(to_string(state_)));
    }

    void on(std::uint8_t from, const wire::ExtendedHeartbeat& hb, double now, std::vector<Outbound>& out)
    {
        if (hb.vehicle_type == wire::VehicleType::LandingPlatform) {
            return;
        }
        liveness_.record(from, now);
        health_[from] = ApHealth{hb.battery_pct(), Vec2{hb.pos_x, hb.pos_y}, hb.system_state, now};
        // The AP is told either way, so it can keep the slot or release it.
        if (auto_reserve(from, hb, now) && promote_next(now, out) != from) {
            out.push_back({from, confirmation_for(from)});
        }
    }

    void on(std::uint8_t, const wire::LpReservationConfirmation&, double, std::vector<Outbound>&)
    {
        drop("confirmation received by an LP");
    }

    std::optional<std::uint8_t> promote_next(double now, std::vector<Outbound>& out)
    {
        if (state_ != LpState::Idle || queue_.empty()) {
            return std::nullopt;
        }
        const auto next = queue_.pop_next();
        current_ap_ = next.ap_sys_id;
        transition(LpState::AwaitingBoarding, now);
        out.push_back({next.ap_sys_id, wire::LpReservationConfirmation{0, next.ap_sys_id}});
        return next.ap_sys_id;
    }

    void transition(LpState to, double now)
    {
        if (!is_legal_transition(state_, to)) {
            throw std::logic_error("illegal LP transition " + std::string(to_string(state_)) + " -> " +
                                   std::string(to_string(to)));
        }
        const auto from = state_;
        state_ = to;
        phase_started_ = now;
        if (observer_) {
            observer_(from, to, now);
        }
    }

    [[nodiscard]] wire::Message confirmation_for(std::uint8_t ap) const
    {
        const auto pos = std::min<std::size_t>(reported_position(ap).value_or(0), 0xFFFF);
        return wire::LpReservationConfirmation{static_cast<std::uint16_t>(pos), ap};
    }

    [[nodiscard]] wire::Message heartbeat() const
    {
        wire::ExtendedHeartbeat hb;
        hb.pos_x = static_cast<float>(cfg_.position.x);
        hb.pos_y = static_cast<float>(cfg_.position.y);
        hb.set_battery_pct(100.0);
        hb.vehicle_type = wire::VehicleType::LandingPlatform;
        hb.flight_stack = wire::FlightStack::None;
        hb.system_state = to_node_state(state_);
        return hb;
    }

    void drop(const std::string& why)
    {
        ++dropped_;
        log(why);
    }

    void log(const std::string& what) const
    {
        if (log_) {
            log_("LP " + std::to_string(cfg_.sys_id) + ": " + what);
        }
    }

    LpConfig cfg_;
    ServiceQueue queue_;
    LpState state_ = LpState::Idle;
    std::optional<std::uint8_t> current_ap_;
    double phase_started_ = 0.0;
    std::optional<double> last_heartbeat_;
    wire::LivenessTracker liveness_;
    std::map<std::uint8_t, wire::Liveness> connection_;
    std::map<std::uint8_t, ApHealth> health_;
    std::size_t services_completed_ = 0;
    std::size_t boarding_timeouts_ = 0;
    std::size_t auto_reservations_ = 0;
    std::size_t dropped_ = 0;
    TransitionObserver observer_;
    LogSink log_;
};

}  // namespace autoserve
