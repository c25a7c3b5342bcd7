#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "autoserve/node_state.hpp"
#include "autoserve/wire/messages.hpp"

namespace autoserve::sim {

enum class TraceKind
{
    Tick,
    MsgSent,
    MsgRecv,
    StateChange,
    Battery,
    Failure,
};

[[nodiscard]] constexpr std::string_view to_string(TraceKind k)
{
    switch (k) {
    case TraceKind::Tick: return "TICK";
    case TraceKind::MsgSent: return "MSG_SENT";
    case TraceKind::MsgRecv: return "MSG_RECV";
    case TraceKind::StateChange: return "STATE_CHANGE";
    case TraceKind::Battery: return "BATTERY";
    case TraceKind::Failure: return "FAILURE";
    }
    return "?";
}

/**
 * One trace line. `actor` is "AP<id>", "LP<id>" or "SIM". `detail` by kind:
 *   MSG_SENT / MSG_RECV  {"mid","from","to","seq","msg":{"type",...fields}}
 *   STATE_CHANGE         {"from","to"} state names
 *   BATTERY              {"pct","x","y"}
 *   FAILURE              {"pct"}
 */
struct TraceRecord
{
    std::int64_t t = 0;
    std::string actor;
    TraceKind kind = TraceKind::Tick;
    nlohmann::json detail;
};

using TraceSink = std::function<void(const TraceRecord&)>;

[[nodiscard]] inline nlohmann::json to_json(const TraceRecord& r)
{
    nlohmann::json j;
    j["t"] = r.t;
    j["actor"] = r.actor;
    j["kind"] = std::string(to_string(r.kind));
    if (!r.detail.is_null()) {
        j["detail"] = r.detail;
    }
    return j;
}

/// JSON Lines writer. One compact object per line, keys in sorted order.
class JsonlTraceWriter
{
public:
    explicit JsonlTraceWriter(std::ostream& out) : out_(out) {}

    void header(const nlohmann::json& h) { out_ << h.dump() << '\n'; }
    void operator()(const TraceRecord& r) { out_ << to_json(r).dump() << '\n'; }

private:
    std::ostream& out_;
};

[[nodiscard]] inline nlohmann::json message_to_json(const wire::Message& msg)
{
    using namespace wire;
    nlohmann::json j;
    j["type"] = std::string(name_of(msg));
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ExtendedHeartbeat>) {
                j["pos_x"] = m.pos_x;
                j["pos_y"] = m.pos_y;
                j["battery_cpct"] = m.battery_cpct;
                j["vehicle_type"] = static_cast<int>(m.vehicle_type);
                j["flight_stack"] = static_cast<int>(m.flight_stack);
                j["system_state"] = std::string(to_string(m.system_state));
                j["component_type"] = m.component_type;
                j["flight_mode"] = m.flight_mode;
            } else if constexpr (std::is_same_v<T, ServiceReservationRequest>) {
                j["priority"] = m.priority;
                j["target_lp_sys_id"] = m.target_lp_sys_id;
            } else if constexpr (std::is_same_v<T, LpReservationConfirmation>) {
                j["queue_position"] = m.queue_position;
                j["target_ap_sys_id"] = m.target_ap_sys_id;
            } else if constexpr (std::is_same_v<T, ApReservationDecision>) {
                j["target_lp_sys_id"] = m.target_lp_sys_id;
                j["decision"] = std::string(to_string(m.decision));
            } else if constexpr (std::is_same_v<T, SystemStateUpdate>) {
                j["state"] = std::string(to_string(m.state));
            }
        },
        msg);
    return j;
}

[[nodiscard]] inline wire::Message message_from_json(const nlohmann::json& j)
{
    using namespace wire;
    const auto type = j.at("type").get<std::string>();
    auto state = [](const nlohmann::json& v) {
        auto s = node_state_from_string(v.get<std::string>());
        if (!s) {
            throw std::invalid_argument("unknown state " + v.get<std::string>());
        }
        return *s;
    };
    if (type == ExtendedHeartbeat::name) {
        ExtendedHeartbeat m;
        m.pos_x = j.at("pos_x").get<float>();
        m.pos_y = j.at("pos_y").get<float>();
        m.battery_cpct = j.at("battery_cpct").get<std::uint16_t>();
        m.vehicle_type = static_cast<VehicleType>(j.at("vehicle_type").get<int>());
        m.flight_stack = static_cast<FlightStack>(j.at("flight_stack").get<int>());
        m.system_state = state(j.at("system_state"));
        m.component_type = j.at("component_type").get<std::uint8_t>();
        m.flight_mode = j.at("flight_mode").get<std::uint8_t>();
        return m;
    }
    if (type == ServiceReservationRequest::name) {
        return ServiceReservationRequest{j.at("priority").get<std::uint8_t>(), j.at("target_lp_sys_id").get<std::uint8_t>()};
    }
    if (type == LpReservationConfirmation::name) {
        return LpReservationConfirmation{j.at("queue_position").get<std::uint16_t>(),
                                         j.at("target_ap_sys_id").get<std::uint8_t>()};
    }
    if (type == ApReservationDecision::name) {
        return ApReservationDecision{j.at("target_lp_sys_id").get<std::uint8_t>(),
                                     j.at("decision").get<std::string>() == "KEEP" ? Decision::Keep : Decision::Cancel};
    }
    if (type == SystemStateUpdate::name) {
        return SystemStateUpdate{state(j.at("state"))};
    }
    throw std::invalid_argument("unknown message type " + type);
}

}  // namespace autoserve::sim
