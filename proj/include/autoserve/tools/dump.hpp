#pragma once

#include <cctype>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autoserve/wire/frame.hpp"

namespace autoserve::tools {

/// Hex to bytes. Whitespace, ':' and '-' separators and a leading "0x" are ignored.
[[nodiscard]] inline std::vector<std::uint8_t> parse_hex(std::string_view text)
{
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
    }
    std::vector<std::uint8_t> out;
    int hi = -1;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ':' || c == '-') {
            continue;
        }
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            throw std::invalid_argument(std::string("not a hex digit: '") + c + "'");
        }
        const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
        if (hi < 0) {
            hi = v;
        } else {
            out.push_back(static_cast<std::uint8_t>((hi << 4) | v));
            hi = -1;
        }
    }
    if (hi >= 0) {
        throw std::invalid_argument("odd number of hex digits");
    }
    return out;
}

[[nodiscard]] inline std::string to_hex(std::span<const std::uint8_t> bytes)
{
    std::ostringstream ss;
    ss << std::hex << std::setfill('0');
    for (auto b : bytes) {
        ss << std::setw(2) << static_cast<int>(b);
    }
    return ss.str();
}

/// Prints a frame's header, message fields and signature block as name=value lines.
inline void dump_frame(std::span<const std::uint8_t> bytes, std::ostream& out)
{
    const auto f = wire::parse_frame(bytes);
    const auto& h = f.header;
    out << "magic=0x" << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(h.magic) << std::dec << '\n'
        << "payload_len=" << static_cast<int>(h.payload_len) << '\n'
        << "incompat_flags=" << static_cast<int>(h.incompat_flags) << '\n'
        << "compat_flags=" << static_cast<int>(h.compat_flags) << '\n'
        << "seq=" << static_cast<int>(h.seq) << '\n'
        << "sys_id=" << static_cast<int>(h.sys_id) << '\n'
        << "comp_id=" << static_cast<int>(h.comp_id) << '\n'
        << "msg_id=" << h.msg_id << '\n'
        << "msg_name=" << wire::name_of(f.message) << '\n';

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, wire::ExtendedHeartbeat>) {
                out << "pos_x=" << m.pos_x << '\n'
                    << "pos_y=" << m.pos_y << '\n'
                    << "battery_pct=" << m.battery_pct() << '\n'
                    << "vehicle_type=" << static_cast<int>(m.vehicle_type) << '\n'
                    << "flight_stack=" << static_cast<int>(m.flight_stack) << '\n'
                    << "system_state=" << to_string(m.system_state) << '\n'
                    << "component_type=" << static_cast<int>(m.component_type) << '\n'
                    << "flight_mode=" << static_cast<int>(m.flight_mode) << '\n';
            } else if constexpr (std::is_same_v<T, wire::ServiceReservationRequest>) {
                out << "priority=" << static_cast<int>(m.priority) << '\n'
                    << "target_lp_sys_id=" << static_cast<int>(m.target_lp_sys_id) << '\n';
            } else if constexpr (std::is_same_v<T, wire::LpReservationConfirmation>) {
                out << "target_ap_sys_id=" << static_cast<int>(m.target_ap_sys_id) << '\n'
                    << "queue_position=" << m.queue_position << '\n';
            } else if constexpr (std::is_same_v<T, wire::ApReservationDecision>) {
                out << "target_lp_sys_id=" << static_cast<int>(m.target_lp_sys_id) << '\n'
                    << "decision=" << wire::to_string(m.decision) << '\n';
            } else if constexpr (std::is_same_v<T, wire::SystemStateUpdate>) {
                out << "state=" << to_string(m.state) << '\n';
            }
        },
        f.message);

    const std::size_t crc_at = wire::HeaderSize + h.payload_len;
    out << "checksum=0x" << std::hex << std::setw(4) << std::setfill('0')
        << (bytes[crc_at] | (bytes[crc_at + 1] << 8)) << std::dec << '\n';
    out << "signed=" << (h.is_signed() ? "true" : "false") << '\n';
    if (f.signature) {
        out << "link_id=" << static_cast<int>(f.signature->link_id) << '\n'
            << "timestamp=" << f.signature->timestamp << '\n'
            << "signature=" << to_hex(f.signature->sig) << '\n';
    }
}

}  // namespace autoserve::tools
