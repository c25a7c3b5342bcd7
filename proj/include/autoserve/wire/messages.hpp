#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "autoserve/node_state.hpp"
#include "autoserve/wire/crc.hpp"
#include "autoserve/wire/error.hpp"

namespace autoserve::wire {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

// Little-endian field packing.
class ByteWriter
{
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v)
    {
        out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) {
            out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
        }
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

private:
    std::vector<std::uint8_t>& out_;
};

class ByteReader
{
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() { return in_[pos_++]; }
    std::uint16_t u16()
    {
        const auto lo = in_[pos_];
        const auto hi = in_[pos_ + 1];
        pos_ += 2;
        return static_cast<std::uint16_t>(lo | (hi << 8));
    }
    std::uint32_t u32()
    {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

/// MAV_TYPE subset.
enum class VehicleType : std::uint8_t
{
    Generic = 0,
    Quadrotor = 2,
    Hexarotor = 13,
    LandingPlatform = 201,
};

/// MAV_AUTOPILOT subset.
enum class FlightStack : std::uint8_t
{
    Generic = 0,
    ArduPilot = 3,
    None = 8,
    Px4 = 12,
};

enum class Decision : std::uint8_t
{
    Keep = 0,
    Cancel = 1,
};

[[nodiscard]] constexpr std::string_view to_string(Decision d)
{
    return d == Decision::Keep ? "KEEP" : "CANCEL";
}

/**
 * Periodic liveness and health beacon. Carries the stock heartbeat attributes
 * (vehicle type, flight stack, component type, flight mode) plus battery,
 * position and mission state. component_type and flight_mode are opaque.
 */
struct ExtendedHeartbeat
{
    static constexpr std::uint32_t msg_id = 42000;
    static constexpr std::string_view name = "AUTOSERVE_EXTENDED_HEARTBEAT";
    static constexpr std::array<FieldSpec, 8> fields{{
        {"float", "pos_x"},
        {"float", "pos_y"},
        {"uint16_t", "battery_cpct"},
        {"uint8_t", "vehicle_type"},
        {"uint8_t", "flight_stack"},
        {"uint8_t", "system_state"},
        {"uint8_t", "component_type"},
        {"uint8_t", "flight_mode"},
    }};
    static constexpr std::size_t payload_size = 15;

    float pos_x = 0.0F;
    float pos_y = 0.0F;
    std::uint16_t battery_cpct = 0;  // centi-percent, 0..10000
    VehicleType vehicle_type = VehicleType::Generic;
    FlightStack flight_stack = FlightStack::Generic;
    NodeState system_state = NodeState::Idle;
    std::uint8_t component_type = 0;
    std::uint8_t flight_mode = 0;

    [[nodiscard]] double battery_pct() const { return battery_cpct / 100.0; }
    void set_battery_pct(double pct)
    {
        const double clamped = std::fmin(100.0, std::fmax(0.0, pct));
        battery_cpct = static_cast<std::uint16_t>(std::lround(clamped * 100.0));
    }

    void write(ByteWriter& w) const
    {
        w.f32(pos_x);
        w.f32(pos_y);
        w.u16(battery_cpct);
        w.u8(static_cast<std::uint8_t>(vehicle_type));
        w.u8(static_cast<std::uint8_t>(flight_stack));
        w.u8(static_cast<std::uint8_t>(system_state));
        w.u8(component_type);
        w.u8(flight_mode);
    }

    static ExtendedHeartbeat read(ByteReader& r)
    {
        ExtendedHeartbeat m;
        m.pos_x = r.f32();
        m.pos_y = r.f32();
        m.battery_cpct = r.u16();
        m.vehicle_type = static_cast<VehicleType>(r.u8());
        m.flight_stack = static_cast<FlightStack>(r.u8());
        const auto state = node_state_from_code(r.u8());
        m.component_type = r.u8();
        m.flight_mode = r.u8();
        if (m.battery_cpct > 10000 || !state) {
            throw WireError(WireErrc::MalformedFrame, "heartbeat field out of range");
        }
        m.system_state = *state;
        return m;
    }

    bool operator==(const ExtendedHeartbeat&) const = default;
};

struct ServiceReservationRequest
{
    static constexpr std::uint32_t msg_id = 42001;
    static constexpr std::string_view name = "AUTOSERVE_SERVICE_RESERVATION_REQUEST";
    static constexpr std::array<FieldSpec, 2> fields{{
        {"uint8_t", "priority"},
        {"uint8_t", "target_lp_sys_id"},
    }};
    static constexpr std::size_t payload_size = 2;

    std::uint8_t priority = 0;  // 0..100, higher is more urgent
    std::uint8_t target_lp_sys_id = 0;

    void write(ByteWriter& w) const
    {
        w.u8(priority);
        w.u8(target_lp_sys_id);
    }

    static ServiceReservationRequest read(ByteReader& r)
    {
        ServiceReservationRequest m;
        m.priority = r.u8();
        m.target_lp_sys_id = r.u8();
        if (m.priority > 100) {
            throw WireError(WireErrc::MalformedFrame, "priority out of range");
        }
        return m;
    }

    bool operator==(const ServiceReservationRequest&) const = default;
};

struct LpReservationConfirmation
{
    static constexpr std::uint32_t msg_id = 42002;
    static constexpr std::string_view name = "AUTOSERVE_LP_RESERVATION_CONFIRMATION";
    static constexpr std::array<FieldSpec, 2> fields{{
        {"uint16_t", "queue_position"},
        {"uint8_t", "target_ap_sys_id"},
    }};
    static constexpr std::size_t payload_size = 3;

    std::uint16_t queue_position = 0;
    std::uint8_t target_ap_sys_id = 0;

    void write(ByteWriter& w) const
    {
        w.u16(queue_position);
        w.u8(target_ap_sys_id);
    }

    static LpReservationConfirmation read(ByteReader& r)
    {
        LpReservationConfirmation m;
        m.queue_position = r.u16();
        m.target_ap_sys_id = r.u8();
        return m;
    }

    bool operator==(const LpReservationConfirmation&) const = default;
};

struct ApReservationDecision
{
    static constexpr std::uint32_t msg_id = 42003;
    static constexpr std::string_view name = "AUTOSERVE_AP_RESERVATION_DECISION";
    static constexpr std::array<FieldSpec, 2> fields{{
        {"uint8_t", "target_lp_sys_id"},
        {"uint8_t", "decision"},
    }};
    static constexpr std::size_t payload_size = 2;

    std::uint8_t target_lp_sys_id = 0;
    Decision decision = Decision::Keep;

    void write(ByteWriter& w) const
    {
        w.u8(target_lp_sys_id);
        w.u8(static_cast<std::uint8_t>(decision));
    }

    static ApReservationDecision read(ByteReader& r)
    {
        ApReservationDecision m;
        m.target_lp_sys_id = r.u8();
        const auto d = r.u8();
        if (d > 1) {
            throw WireError(WireErrc::MalformedFrame, "decision out of range");
        }
        m.decision = static_cast<Decision>(d);
        return m;
    }

    bool operator==(const ApReservationDecision&) const = default;
};

struct SystemStateUpdate
{
    static constexpr std::uint32_t msg_id = 42004;
    static constexpr std::string_view name = "AUTOSERVE_SYSTEM_STATE_UPDATE";
    static constexpr std::array<FieldSpec, 1> fields{{
        {"uint8_t", "state"},
    }};
    static constexpr std::size_t payload_size = 1;

    NodeState state = NodeState::Idle;

    void write(ByteWriter& w) const { w.u8(static_cast<std::uint8_t>(state)); }

    static SystemStateUpdate read(ByteReader& r)
    {
        const auto s = node_state_from_code(r.u8());
        if (!s) {
            throw WireError(WireErrc::MalformedFrame, "unknown state code");
        }
        return SystemStateUpdate{*s};
    }

    bool operator==(const SystemStateUpdate&) const = default;
};

using Message = std::variant<ExtendedHeartbeat, ServiceReservationRequest, LpReservationConfirmation,
                             ApReservationDecision, SystemStateUpdate>;

/// Static per-id facts needed by the framer.
struct MessageInfo
{
    std::uint32_t msg_id;
    std::string_view name;
    std::uint8_t crc_extra;
    std::size_t payload_size;
};

namespace detail {
template <class T>
constexpr MessageInfo info_of()
{
    return MessageInfo{T::msg_id, T::name, crc_extra_for(T::name, T::fields), T::payload_size};
}
}  // namespace detail

inline constexpr std::array<MessageInfo, 5> message_table{{
    detail::info_of<ExtendedHeartbeat>(),
    detail::info_of<ServiceReservationRequest>(),
    detail::info_of<LpReservationConfirmation>(),
    detail::info_of<ApReservationDecision>(),
    detail::info_of<SystemStateUpdate>(),
}};

[[nodiscard]] constexpr std::optional<MessageInfo> find_message_info(std::uint32_t msg_id)
{
    for (const auto& info : message_table) {
        if (info.msg_id == msg_id) {
            return info;
        }
    }
    return std::nullopt;
}

[[nodiscard]] inline std::uint32_t msg_id_of(const Message& m)
{
    return std::visit([](const auto& v) { return std::decay_t<decltype(v)>::msg_id; }, m);
}

[[nodiscard]] inline std::string_view name_of(const Message& m)
{
    return std::visit([](const auto& v) { return std::decay_t<decltype(v)>::name; }, m);
}

/// Full-length payload, before trailing-zero truncation.
[[nodiscard]] inline std::vector<std::uint8_t> serialize_payload(const Message& m)
{
    std::vector<std::uint8_t> out;
    out.reserve(16);
    ByteWriter w(out);
    std::visit([&](const auto& v) { v.write(w); }, m);
    return out;
}

/**
 * Parses a (possibly truncated) payload. Missing trailing bytes read as zero;
 * a payload longer than the message definition is rejected.
 */
[[nodiscard]] inline Message parse_payload(std::uint32_t msg_id, std::span<const std::uint8_t> payload)
{
    const auto info = find_message_info(msg_id);
    if (!info) {
        throw WireError(WireErrc::UnknownMsgId, std::to_string(msg_id));
    }
    if (payload.size() > info->payload_size) {
        throw WireError(WireErrc::MalformedFrame, "payload longer than message definition");
    }
    std::array<std::uint8_t, 32> full{};
    std::memcpy(full.data(), payload.data(), payload.size());
    ByteReader r(std::span<const std::uint8_t>(full.data(), info->payload_size));
    switch (msg_id) {
    case ExtendedHeartbeat::msg_id: return ExtendedHeartbeat::read(r);
    case ServiceReservationRequest::msg_id: return ServiceReservationRequest::read(r);
    case LpReservationConfirmation::msg_id: return LpReservationConfirmation::read(r);
    case ApReservationDecision::msg_id: return ApReservationDecision::read(r);
    case SystemStateUpdate::msg_id: return SystemStateUpdate::read(r);
    default: break;
    }
    throw WireError(WireErrc::UnknownMsgId, std::to_string(msg_id));
}

}  // namespace autoserve::wire
