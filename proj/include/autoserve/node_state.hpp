#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace autoserve {

/**
 * Mission-state codes shared by both node kinds on the wire. The same code space is
 * used for heartbeat `system_state` and for SystemStateUpdate.
 *
 * 0..9 are landing-platform states, 10..19 aerial-platform states, 20.. are events
 * that only appear inside SystemStateUpdate.
 */
enum class NodeState : std::uint8_t
{
    Idle = 0,
    AwaitingBoarding = 1,
    Aligning = 2,
    Servicing = 3,
    Releasing = 4,

    Operating = 10,
    RequestPending = 11,
    ReservedWaiting = 12,
    Boarding = 13,
    Landed = 14,
    BeingServiced = 15,
    Departing = 16,

    Departed = 20,
    ServiceComplete = 21,
};

[[nodiscard]] constexpr std::string_view to_string(NodeState s)
{
    switch (s) {
    case NodeState::Idle: return "IDLE";
    case NodeState::AwaitingBoarding: return "AWAITING_BOARDING";
    case NodeState::Aligning: return "ALIGNING";
    case NodeState::Servicing: return "SERVICING";
    case NodeState::Releasing: return "RELEASING";
    case NodeState::Operating: return "OPERATING";
    case NodeState::RequestPending: return "REQUEST_PENDING";
    case NodeState::ReservedWaiting: return "RESERVED_WAITING";
    case NodeState::Boarding: return "BOARDING";
    case NodeState::Landed: return "LANDED";
    case NodeState::BeingServiced: return "BEING_SERVICED";
    case NodeState::Departing: return "DEPARTING";
    case NodeState::Departed: return "DEPARTED";
    case NodeState::ServiceComplete: return "SERVICE_COMPLETE";
    }
    return "UNKNOWN";
}

[[nodiscard]] constexpr std::optional<NodeState> node_state_from_code(std::uint8_t code)
{
    switch (code) {
    case 0: case 1: case 2: case 3: case 4:
    case 10: case 11: case 12: case 13: case 14: case 15: case 16:
    case 20: case 21:
        return static_cast<NodeState>(code);
    default:
        return std::nullopt;
    }
}

[[nodiscard]] constexpr std::optional<NodeState> node_state_from_string(std::string_view name)
{
    for (std::uint8_t c = 0; c < 32; ++c) {
        if (auto s = node_state_from_code(c); s && to_string(*s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

}  // namespace autoserve
