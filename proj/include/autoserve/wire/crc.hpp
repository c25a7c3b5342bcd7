#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace autoserve::wire {

/**
 * CRC-16/X.25: reflected polynomial 0x1021 (0x8408), init 0xFFFF, final xor 0xFFFF.
 *
 * The accumulator keeps the raw register; value() applies the final xor. Frame
 * checksums feed the header and payload first and the per-message crc_extra byte last.
 */
class Crc16X25
{
public:
    static constexpr std::uint16_t Init = 0xFFFF;
    static constexpr std::uint16_t XorOut = 0xFFFF;

    constexpr void add(std::uint8_t byte)
    {
        reg_ = static_cast<std::uint16_t>((reg_ >> 8) ^ table()[(reg_ ^ byte) & 0xFF]);
    }

    constexpr void add(std::span<const std::uint8_t> bytes)
    {
        for (auto b : bytes) {
            add(b);
        }
    }

    constexpr void add(std::string_view text)
    {
        for (char c : text) {
            add(static_cast<std::uint8_t>(c));
        }
    }

    /// Register before the final xor (the MAVLink accumulator value).
    [[nodiscard]] constexpr std::uint16_t raw() const { return reg_; }
    [[nodiscard]] constexpr std::uint16_t value() const { return static_cast<std::uint16_t>(reg_ ^ XorOut); }

    static constexpr std::array<std::uint16_t, 256> make_table()
    {
        std::array<std::uint16_t, 256> t{};
        for (unsigned i = 0; i < 256; ++i) {
            std::uint16_t r = static_cast<std::uint16_t>(i);
            for (int bit = 0; bit < 8; ++bit) {
                r = (r & 1U) ? static_cast<std::uint16_t>((r >> 1) ^ 0x8408U) : static_cast<std::uint16_t>(r >> 1);
            }
            t[i] = r;
        }
        return t;
    }

private:
    static constexpr const std::array<std::uint16_t, 256>& table();

    std::uint16_t reg_ = Init;
};

namespace detail {
inline constexpr auto x25_table = Crc16X25::make_table();
}

constexpr const std::array<std::uint16_t, 256>& Crc16X25::table()
{
    return detail::x25_table;
}

/// CRC-16/X.25 of `bytes` with no extra seed byte.
[[nodiscard]] constexpr std::uint16_t crc16_x25(std::span<const std::uint8_t> bytes)
{
    Crc16X25 crc;
    crc.add(bytes);
    return crc.value();
}

/// Frame checksum: X.25 over header-and-payload (magic excluded), then crc_extra.
[[nodiscard]] constexpr std::uint16_t compute_checksum(std::span<const std::uint8_t> header_and_payload,
                                                       std::uint8_t crc_extra)
{
    Crc16X25 crc;
    crc.add(header_and_payload);
    crc.add(crc_extra);
    return crc.value();
}

/// One field of a message definition, in wire order.
struct FieldSpec
{
    std::string_view type;  // C type name as used in MAVLink XML, e.g. "uint8_t"
    std::string_view name;
    std::uint8_t array_length = 0;
};

/**
 * MAVLink seeding rule for crc_extra: accumulate "NAME " and then "type name " for every
 * field in wire order (plus the array length byte for arrays), and fold the 16-bit
 * accumulator to one byte as (low ^ high).
 */
template <std::size_t N>
[[nodiscard]] constexpr std::uint8_t crc_extra_for(std::string_view message_name,
                                                   const std::array<FieldSpec, N>& fields)
{
    Crc16X25 crc;
    crc.add(message_name);
    crc.add(static_cast<std::uint8_t>(' '));
    for (const auto& f : fields) {
        crc.add(f.type);
        crc.add(static_cast<std::uint8_t>(' '));
        crc.add(f.name);
        crc.add(static_cast<std::uint8_t>(' '));
        if (f.array_length != 0) {
            crc.add(f.array_length);
        }
    }
    const std::uint16_t raw = crc.raw();
    return static_cast<std::uint8_t>((raw & 0xFF) ^ (raw >> 8));
}

}  // namespace autoserve::wire
