#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoserve/common.hpp"
#include "autoserve/node_state.hpp"
#include "autoserve/reservation.hpp"
#include "autoserve/wire/messages.hpp"

namespace autoserve {

/// Aerial-platform phases. Values are the shared NodeState codes.
enum class ApState : std::uint8_t
{
    Operating = static_cast<std::uint8_t>(NodeState::Operating),
    RequestPending = static_cast<std::uint8_t>(NodeState::RequestPending),
    ReservedWaiting = static_cast<std::uint8_t>(NodeState::ReservedWaiting),
    Boarding = static_cast<std::uint8_t>(NodeState::Boarding),
    Landed = static_cast<std::uint8_t>(NodeState::Landed),
    BeingServiced = static_cast<std::uint8_t>(NodeState::BeingServiced),
    Departing = static_cast<std::uint8_t>(NodeState::Departing),
};

[[nodiscard]] constexpr NodeState to_node_state(ApState s) { return static_cast<NodeState>(s); }
[[nodiscard]] constexpr std::string_view to_string(ApState s) { return to_string(to_node_state(s)); }

[[nodiscard]] constexpr bool is_legal_transition(ApState from, ApState to)
{
    switch (from) {
    case ApState::Operating: return to == ApState::RequestPending;
    case ApState::RequestPending: return to == ApState::ReservedWaiting;
    case ApState::ReservedWaiting: return to == ApState::Boarding;
    case ApState::Boarding: return to == ApState::Landed;
    case ApState::Landed: return to == ApState::BeingServiced;
    case ApState::BeingServiced: return to == ApState::Departing;
    case ApState::Departing: return to == ApState::Operating;
    }
    return false;
}

[[nodiscard]] constexpr bool holds_reservation(ApState s)
{
    return s == ApState::ReservedWaiting || s == ApState::Boarding || s == ApState::Landed ||
           s == ApState::BeingServiced;
}

/// Battery consumption is suspended while docked.
[[nodiscard]] constexpr bool is_docked(ApState s)
{
    return s == ApState::Landed || s == ApState::BeingServiced;
}

struct ApConfig
{
    std::uint8_t sys_id = 100;
    std::uint8_t comp_id = 1;
    double request_threshold_pct = 50.0;
    double reserve_floor_pct = 15.0;
    double service_duration_estimate_s = 120.0;
    double cruise_speed_mps = 0.3;
    double max_consumption_pct_per_s = 0.20;
    double heartbeat_period_s = 1.0;
    double arrival_tolerance_m = 0.5;
    double departure_duration_s = 1.0;
    /// Re-request the slot if landed this long without the LP starting service.
    double landed_timeout_s = 60.0;
    /// While waiting for its turn, fly to the LP and hold there instead of holding in place.
    bool wait_at_lp = false;
    wire::VehicleType vehicle_type = wire::VehicleType::Quadrotor;
    wire::FlightStack flight_stack = wire::FlightStack::Px4;
    std::vector<LpSite> roster;
};

struct Telemetry
{
    double battery_pct = 100.0;
    Vec2 position;
};

struct HeldReservation
{
    std::uint8_t lp_sys_id = 0;
    std::size_t last_known_position = 0;

    bool operator==(const HeldReservation&) const = default;
};

struct ConfirmationVerdict
{
    enum class Kind
    {
        Keep,
        CancelAndRetry,
    };
    Kind kind = Kind::Keep;
    std::uint8_t next_lp_sys_id = 0;  // only for CancelAndRetry

    bool operator==(const ConfirmationVerdict&) const = default;
};

class ConfirmationForWrongAp : public std::invalid_argument
{
public:
    ConfirmationForWrongAp(std::uint8_t got, std::uint8_t self)
        : std::invalid_argument("confirmation for AP " + std::to_string(got) + " received by AP " + std::to_string(self))
    {
    }
};

/// What the host should do with the airframe this tick.
struct MotionCommand
{
    enum class Kind
    {
        Wander,    // free operation: random displacement
        Hold,      // zero commanded displacement
        Approach,  // straight toward `target`
        Docked,
    };
    Kind kind = Kind::Wander;
    Vec2 target;
};

/**
 * The aerial platform's side of the reservation protocol: request when the battery
 * falls below the threshold, judge each confirmation against the remaining margin,
 * keep or move on, then board, get serviced and leave.
 */
class ApNode
{
public:
    using TransitionObserver = std::function<void(ApState from, ApState to, double now)>;

    explicit ApNode(ApConfig cfg) : cfg_(std::move(cfg))
    {
        if (cfg_.sys_id == 0) {
            throw std::invalid_argument("AP sys_id must be non-zero");
        }
        if (cfg_.cruise_speed_mps <= 0.0 || cfg_.max_consumption_pct_per_s <= 0.0) {
            throw std::invalid_argument("cruise speed and consumption rate must be positive");
        }
    }

    std::vector<Outbound> tick(double now, const Telemetry& telemetry)
    {
        battery_pct_ = telemetry.battery_pct;
        position_ = telemetry.position;
        std::vector<Outbound> out;

        switch (state_) {
        case ApState::Operating:
            if (battery_pct_ < cfg_.request_threshold_pct) {
                begin_request(now, out);
            }
            break;
        case ApState::Boarding:
            if (distance(position_, lp_position(reservation_->lp_sys_id)) <= cfg_.arrival_tolerance_m) {
                transition(ApState::Landed, now);
                landed_at_ = now;
                out.push_back({reservation_->lp_sys_id, wire::SystemStateUpdate{NodeState::Landed}});
            }
            break;
        case ApState::Landed:
            if (now - landed_at_ >= cfg_.landed_timeout_s) {
                log("no service start after landing, re-requesting");
                landed_at_ = now;
                out.push_back({reservation_->lp_sys_id, request_for(reservation_->lp_sys_id)});
            }
            break;
        case ApState::Departing:
            if (now - departing_since_ >= cfg_.departure_duration_s) {
                out.push_back({departing_from_, wire::SystemStateUpdate{NodeState::Departed}});
                transition(ApState::Operating, now);
            }
            break;
        default:
            break;
        }

        if (!last_heartbeat_ || now - *last_heartbeat_ >= cfg_.heartbeat_period_s) {
            last_heartbeat_ = now;
            out.push_back({BroadcastId, heartbeat()});
        }
        return out;
    }

    std::vector<Outbound> handle_message(std::uint8_t from, const wire::Message& msg, double now)
    {
        std::vector<Outbound> out;
        if (const auto* conf = std::get_if<wire::LpReservationConfirmation>(&msg)) {
            on_confirmation(from, *conf, now, out);
        } else if (const auto* upd = std::get_if<wire::SystemStateUpdate>(&msg)) {
            auto more = handle_state_update(from, *upd, now);
            out.insert(out.end(), more.begin(), more.end());
        }
        // Heartbeats from LPs and AP-bound request/decision messages carry nothing for us.
        return out;
    }

    /**
     * Keep iff the estimated time to service fits the battery margin:
     *   position * service_estimate + travel_time <= (battery - reserve_floor) / max_rate.
     * Otherwise move to the nearest LP not yet tried. When every LP has been tried the
     * best offer seen (smallest estimated time) is kept.
     */
    ConfirmationVerdict evaluate_confirmation(std::uint8_t from_lp, const wire::LpReservationConfirmation& conf,
                                              double /*now*/)
    {
        if (conf.target_ap_sys_id != cfg_.sys_id) {
            throw ConfirmationForWrongAp(conf.target_ap_sys_id, cfg_.sys_id);
        }
        if (conf.queue_position == 0 || final_lp_ == from_lp) {
            return {ConfirmationVerdict::Kind::Keep, 0};
        }
        const double estimate = estimated_time_to_service(from_lp, conf.queue_position);
        tried_.insert(from_lp);
        if (!best_offer_ || estimate < best_offer_->second ||
            (estimate == best_offer_->second && from_lp < best_offer_->first)) {
            best_offer_ = {from_lp, estimate};
        }
        if (estimate <= flight_margin_s()) {
            return {ConfirmationVerdict::Kind::Keep, 0};
        }
        const auto next = nearest_lp(cfg_.roster, position_, [this](std::uint8_t id) { return tried_.contains(id); });
        if (next) {
            return {ConfirmationVerdict::Kind::CancelAndRetry, next->sys_id};
        }
        if (best_offer_->first == from_lp) {
            return {ConfirmationVerdict::Kind::Keep, 0};
        }
        final_lp_ = best_offer_->first;
        return {ConfirmationVerdict::Kind::CancelAndRetry, best_offer_->first};
    }

    std::vector<Outbound> handle_state_update(std::uint8_t from, const wire::SystemStateUpdate& upd, double now)
    {
        std::vector<Outbound> out;
        if (!reservation_ || reservation_->lp_sys_id != from) {
            log("state update from LP " + std::to_string(from) + " without a reservation there");
            return out;
        }
        if (upd.state == NodeState::Servicing && state_ == ApState::Landed) {
            transition(ApState::BeingServiced, now);
        } else if (upd.state == NodeState::ServiceComplete && state_ == ApState::BeingServiced) {
            departing_from_ = from;
            departing_since_ = now;
            ++services_received_;
            transition(ApState::Departing, now);
        } else {
            log(std::string(to_string(upd.state)) + " ignored while " + std::string(to_string(state_)));
        }
        return out;
    }

    [[nodiscard]] double estimated_time_to_service(std::uint8_t lp, std::size_t queue_position) const
    {
        const double travel = distance(position_, lp_position(lp)) / cfg_.cruise_speed_mps;
        return static_cast<double>(queue_position) * cfg_.service_duration_estimate_s + travel;
    }

    /// Seconds of flight left above the reserve floor at the worst-case consumption rate.
    [[nodiscard]] double flight_margin_s() const
    {
        return (battery_pct_ - cfg_.reserve_floor_pct) / cfg_.max_consumption_pct_per_s;
    }

    [[nodiscard]] MotionCommand motion() const
    {
        switch (state_) {
        case ApState::Operating: return {MotionCommand::Kind::Wander, {}};
        case ApState::ReservedWaiting:
            if (cfg_.wait_at_lp) {
                return {MotionCommand::Kind::Approach, lp_position(reservation_->lp_sys_id)};
            }
            return {MotionCommand::Kind::Hold, {}};
        case ApState::Boarding: return {MotionCommand::Kind::Approach, lp_position(reservation_->lp_sys_id)};
        case ApState::Landed:
        case ApState::BeingServiced: return {MotionCommand::Kind::Docked, {}};
        default: return {MotionCommand::Kind::Hold, {}};
        }
    }

    [[nodiscard]] ApState state() const { return state_; }
    [[nodiscard]] const std::optional<HeldReservation>& reservation() const { return reservation_; }
    [[nodiscard]] std::optional<std::uint8_t> pending_lp() const { return pending_lp_; }
    [[nodiscard]] const ApConfig& config() const { return cfg_; }
    [[nodiscard]] std::uint8_t sys_id() const { return cfg_.sys_id; }
    [[nodiscard]] double battery_pct() const { return battery_pct_; }
    [[nodiscard]] Vec2 position() const { return position_; }
    [[nodiscard]] std::size_t services_received() const { return services_received_; }
    [[nodiscard]] std::size_t retries() const { return retries_; }

    void set_observer(TransitionObserver obs) { observer_ = std::move(obs); }
    void set_log(LogSink sink) { log_ = std::move(sink); }

private:
    void begin_request(double now, std::vector<Outbound>& out)
    {
        tried_.clear();
        best_offer_.reset();
        final_lp_.reset();
        const auto target = nearest_lp(cfg_.roster, position_);
        if (!target) {
            log("no LP known");
            return;
        }
        pending_lp_ = target->sys_id;
        transition(ApState::RequestPending, now);
        out.push_back({target->sys_id, request_for(target->sys_id)});
    }

    void on_confirmation(std::uint8_t from, const wire::LpReservationConfirmation& conf, double now,
                         std::vector<Outbound>& out)
    {
        if (conf.target_ap_sys_id != cfg_.sys_id) {
            log("confirmation for another AP dropped");
            return;
        }
        if (state_ == ApState::RequestPending && pending_lp_ == from) {
            const auto verdict = evaluate_confirmation(from, conf, now);
            if (verdict.kind == ConfirmationVerdict::Kind::Keep) {
                pending_lp_.reset();
                reservation_ = HeldReservation{from, conf.queue_position};
                transition(ApState::ReservedWaiting, now);
                out.push_back({from, wire::ApReservationDecision{from, wire::Decision::Keep}});
                if (conf.queue_position == 0) {
                    transition(ApState::Boarding, now);
                }
            } else {
                // Cancel goes out before the new request.
                ++retries_;
                out.push_back({from, wire::ApReservationDecision{from, wire::Decision::Cancel}});
                out.push_back({verdict.next_lp_sys_id, request_for(verdict.next_lp_sys_id)});
                pending_lp_ = verdict.next_lp_sys_id;
            }
            return;
        }
        if (reservation_ && reservation_->lp_sys_id == from) {
            reservation_->last_known_position = conf.queue_position;
            if (conf.queue_position == 0 && state_ == ApState::ReservedWaiting) {
                transition(ApState::Boarding, now);
            } else if (conf.queue_position == 0 && state_ == ApState::Landed) {
                out.push_back({from, wire::SystemStateUpdate{NodeState::Landed}});
            }
            return;
        }
        // Unsolicited (e.g. a critical-health reservation, or a slot we already left): release it.
        log("releasing unsolicited reservation at LP " + std::to_string(from));
        out.push_back({from, wire::ApReservationDecision{from, wire::Decision::Cancel}});
    }

    [[nodiscard]] wire::Message request_for(std::uint8_t lp) const
    {
        return wire::ServiceReservationRequest{static_cast<std::uint8_t>(priority_for_battery(battery_pct_)), lp};
    }

    [[nodiscard]] Vec2 lp_position(std::uint8_t lp) const
    {
        for (const auto& site : cfg_.roster) {
            if (site.sys_id == lp) {
                return site.position;
            }
        }
        throw std::out_of_range("LP " + std::to_string(lp) + " is not in the roster");
    }

    void transition(ApState to, double now)
    {
        if (!is_legal_transition(state_, to)) {
            throw std::logic_error("illegal AP transition " + std::string(to_string(state_)) + " -> " +
                                   std::string(to_string(to)));
        }
        const auto from = state_;
        state_ = to;
        if (!holds_reservation(to)) {
            reservation_.reset();
        }
        if (observer_) {
            observer_(from, to, now);
        }
    }

    [[nodiscard]] wire::Message heartbeat() const
    {
        wire::ExtendedHeartbeat hb;
        hb.pos_x = static_cast<float>(position_.x);
        hb.pos_y = static_cast<float>(position_.y);
        hb.set_battery_pct(battery_pct_);
        hb.vehicle_type = cfg_.vehicle_type;
        hb.flight_stack = cfg_.flight_stack;
        hb.system_state = to_node_state(state_);
        return hb;
    }

    void log(const std::string& what) const
    {
        if (log_) {
            log_("AP " + std::to_string(cfg_.sys_id) + ": " + what);
        }
    }

    ApConfig cfg_;
    ApState state_ = ApState::Operating;
    double battery_pct_ = 100.0;
    Vec2 position_;
    std::optional<HeldReservation> reservation_;
    std::optional<std::uint8_t> pending_lp_;
    std::set<std::uint8_t> tried_;
    std::optional<std::pair<std::uint8_t, double>> best_offer_;
    std::optional<std::uint8_t> final_lp_;
    std::uint8_t departing_from_ = 0;
    double departing_since_ = 0.0;
    double landed_at_ = 0.0;
    std::optional<double> last_heartbeat_;
    std::size_t services_received_ = 0;
    std::size_t retries_ = 0;
    TransitionObserver observer_;
    LogSink log_;
};

}  // namespace autoserve
