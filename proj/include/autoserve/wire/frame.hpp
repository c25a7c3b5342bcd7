#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "autoserve/wire/crc.hpp"
#include "autoserve/wire/error.hpp"
#include "autoserve/wire/messages.hpp"
#include "autoserve/wire/sha256.hpp"

namespace autoserve::wire {

// MAVLink v2 layout:
//   magic | len | incompat | compat | seq | sysid | compid | msgid(3, LE) | payload | crc(2, LE) | [signature(13)]
inline constexpr std::uint8_t FrameMagicV2 = 0xFD;
inline constexpr std::uint8_t FrameMagicV1 = 0xFE;
inline constexpr std::size_t HeaderSize = 10;  // includes magic
inline constexpr std::size_t ChecksumSize = 2;
inline constexpr std::size_t SignatureSize = 13;
inline constexpr std::size_t MaxPayloadSize = 255;
inline constexpr std::size_t MaxFrameSize = HeaderSize + MaxPayloadSize + ChecksumSize + SignatureSize;
inline constexpr std::uint8_t IncompatSigned = 0x01;

using SecretKey = std::array<std::uint8_t, 32>;

struct FrameHeader
{
    std::uint8_t magic = FrameMagicV2;
    std::uint8_t payload_len = 0;
    std::uint8_t incompat_flags = 0;
    std::uint8_t compat_flags = 0;
    std::uint8_t seq = 0;
    std::uint8_t sys_id = 0;
    std::uint8_t comp_id = 0;
    std::uint32_t msg_id = 0;  // 24 bits on the wire

    [[nodiscard]] bool is_signed() const { return (incompat_flags & IncompatSigned) != 0; }
    bool operator==(const FrameHeader&) const = default;
};

struct Signature
{
    std::uint8_t link_id = 0;
    std::uint64_t timestamp = 0;  // 48 bits, 10 us units since the signing epoch
    std::array<std::uint8_t, 6> sig{};

    bool operator==(const Signature&) const = default;
};

/// 2015-01-01T00:00:00Z in Unix seconds.
inline constexpr std::int64_t DefaultSigningEpochUnix = 1420070400;

/**
 * Sender-side signing state for one link. Timestamps are strictly increasing: if the
 * clock does not advance between two frames the previous timestamp is bumped by one.
 */
class SigningContext
{
public:
    using Clock = std::function<std::uint64_t()>;

    SigningContext(std::uint8_t link_id, const SecretKey& secret, Clock clock = {},
                   std::int64_t epoch_unix = DefaultSigningEpochUnix)
        : link_id_(link_id)
        , secret_(secret)
        , clock_(std::move(clock))
        , epoch_unix_(epoch_unix)
    {
    }

    [[nodiscard]] std::uint8_t link_id() const { return link_id_; }
    [[nodiscard]] const SecretKey& secret() const { return secret_; }
    [[nodiscard]] std::uint64_t last_timestamp() const { return last_; }

    std::uint64_t next_timestamp()
    {
        std::uint64_t ts = clock_ ? clock_() : wall_clock_units();
        ts &= 0xFFFF'FFFF'FFFFULL;
        if (ts <= last_) {
            ts = last_ + 1;
        }
        last_ = ts;
        return ts;
    }

private:
    [[nodiscard]] std::uint64_t wall_clock_units() const
    {
        using namespace std::chrono;
        const auto since_unix = duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
        const auto since_epoch = since_unix - epoch_unix_ * 1'000'000;
        return since_epoch <= 0 ? 0 : static_cast<std::uint64_t>(since_epoch / 10);
    }

    std::uint8_t link_id_;
    SecretKey secret_;
    Clock clock_;
    std::int64_t epoch_unix_;
    std::uint64_t last_ = 0;
};

/**
 * Receiver-side key material and replay state.
 *
 * A stream is (link_id, sys_id, comp_id). Within a stream timestamps must strictly
 * increase. A stream seen for the first time must not lag the newest timestamp
 * accepted on any stream by more than `replay_window`.
 */
class Keystore
{
public:
    static constexpr std::uint64_t DefaultReplayWindow = 600'000;  // 6 s in 10 us units

    void add_key(std::uint8_t link_id, const SecretKey& secret) { keys_[link_id] = secret; }
    void set_require_signed(bool v) { require_signed_ = v; }
    void set_replay_window(std::uint64_t units) { replay_window_ = units; }

    [[nodiscard]] bool require_signed() const { return require_signed_; }
    [[nodiscard]] const SecretKey* key_for(std::uint8_t link_id) const
    {
        auto it = keys_.find(link_id);
        return it == keys_.end() ? nullptr : &it->second;
    }

    /// Throws StaleTimestamp without touching state if the timestamp is not acceptable.
    void check_fresh(std::uint8_t link_id, std::uint8_t sys_id, std::uint8_t comp_id, std::uint64_t ts) const
    {
        const auto it = last_.find(std::tuple{link_id, sys_id, comp_id});
        if (it != last_.end()) {
            if (ts <= it->second) {
                throw WireError(WireErrc::StaleTimestamp, "timestamp not newer than last accepted");
            }
        } else if (ts + replay_window_ < newest_) {
            throw WireError(WireErrc::StaleTimestamp, "new stream outside replay window");
        }
    }

    void accept(std::uint8_t link_id, std::uint8_t sys_id, std::uint8_t comp_id, std::uint64_t ts)
    {
        last_[std::tuple{link_id, sys_id, comp_id}] = ts;
        newest_ = std::max(newest_, ts);
    }

private:
    std::map<std::uint8_t, SecretKey> keys_;
    std::map<std::tuple<std::uint8_t, std::uint8_t, std::uint8_t>, std::uint64_t> last_;
    std::uint64_t newest_ = 0;
    std::uint64_t replay_window_ = DefaultReplayWindow;
    bool require_signed_ = false;
};

struct DecodedFrame
{
    FrameHeader header;
    Message message;
    std::optional<Signature> signature;
    bool signature_verified = false;
};

namespace detail {

inline std::array<std::uint8_t, 6> compute_signature(const SecretKey& secret,
                                                     std::span<const std::uint8_t> frame_through_crc,
                                                     std::uint8_t link_id, std::uint64_t timestamp)
{
    std::array<std::uint8_t, 7> tail{};
    tail[0] = link_id;
    for (int i = 0; i < 6; ++i) {
        tail[1 + i] = static_cast<std::uint8_t>((timestamp >> (8 * i)) & 0xFF);
    }
    const auto digest = sha256({secret, frame_through_crc, tail});
    std::array<std::uint8_t, 6> sig{};
    std::copy_n(digest.begin(), sig.size(), sig.begin());
    return sig;
}

}  // namespace detail

/**
 * Encodes one message as a v2 frame. The payload is truncated of trailing zeros but
 * keeps at least one byte. With a signing context the frame carries the signed flag
 * and the 13-byte signature block.
 */
[[nodiscard]] inline std::vector<std::uint8_t> encode_frame(const Message& msg, std::uint8_t seq, std::uint8_t sys_id,
                                                            std::uint8_t comp_id, SigningContext* signing = nullptr)
{
    if (sys_id == 0 || comp_id == 0) {
        throw std::invalid_argument("sys_id and comp_id must be in 1..255");
    }
    auto payload = serialize_payload(msg);
    if (payload.size() > MaxPayloadSize) {
        throw WireError(WireErrc::PayloadTooLarge, std::to_string(payload.size()) + " bytes");
    }
    while (payload.size() > 1 && payload.back() == 0) {
        payload.pop_back();
    }
    const auto info = find_message_info(msg_id_of(msg));

    std::vector<std::uint8_t> out;
    out.reserve(HeaderSize + payload.size() + ChecksumSize + (signing ? SignatureSize : 0));
    const std::uint32_t id = info->msg_id;
    out.insert(out.end(), {FrameMagicV2, static_cast<std::uint8_t>(payload.size()),
                           static_cast<std::uint8_t>(signing ? IncompatSigned : 0), 0, seq, sys_id, comp_id,
                           static_cast<std::uint8_t>(id & 0xFF), static_cast<std::uint8_t>((id >> 8) & 0xFF),
                           static_cast<std::uint8_t>((id >> 16) & 0xFF)});
    out.insert(out.end(), payload.begin(), payload.end());

    const auto crc = compute_checksum(std::span(out).subspan(1), info->crc_extra);
    out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    out.push_back(static_cast<std::uint8_t>(crc >> 8));

    if (signing != nullptr) {
        const auto ts = signing->next_timestamp();
        const auto sig = detail::compute_signature(signing->secret(), out, signing->link_id(), ts);
        out.push_back(signing->link_id());
        for (int i = 0; i < 6; ++i) {
            out.push_back(static_cast<std::uint8_t>((ts >> (8 * i)) & 0xFF));
        }
        out.insert(out.end(), sig.begin(), sig.end());
    }
    return out;
}

/// Structural parse with checksum validation. Signatures are extracted but not verified.
[[nodiscard]] inline DecodedFrame parse_frame(std::span<const std::uint8_t> bytes)
{
    if (bytes.empty()) {
        throw WireError(WireErrc::TruncatedFrame, "empty input");
    }
    if (bytes[0] != FrameMagicV2) {
        throw WireError(WireErrc::BadMagic, bytes[0] == FrameMagicV1 ? "v1 frames are not accepted" : "not a v2 frame");
    }
    if (bytes.size() < HeaderSize) {
        throw WireError(WireErrc::TruncatedFrame, "short header");
    }
    FrameHeader h;
    h.magic = bytes[0];
    h.payload_len = bytes[1];
    h.incompat_flags = bytes[2];
    h.compat_flags = bytes[3];
    h.seq = bytes[4];
    h.sys_id = bytes[5];
    h.comp_id = bytes[6];
    h.msg_id = static_cast<std::uint32_t>(bytes[7]) | (static_cast<std::uint32_t>(bytes[8]) << 8) |
               (static_cast<std::uint32_t>(bytes[9]) << 16);

    if ((h.incompat_flags & ~IncompatSigned) != 0) {
        throw WireError(WireErrc::MalformedFrame, "unknown incompat flags");
    }
    const std::size_t crc_end = HeaderSize + h.payload_len + ChecksumSize;
    const std::size_t total = crc_end + (h.is_signed() ? SignatureSize : 0);
    if (bytes.size() < total) {
        throw WireError(WireErrc::TruncatedFrame, "frame shorter than declared length");
    }
    if (bytes.size() > total) {
        throw WireError(WireErrc::MalformedFrame, "trailing bytes after frame");
    }
    const auto info = find_message_info(h.msg_id);
    if (!info) {
        throw WireError(WireErrc::UnknownMsgId, std::to_string(h.msg_id));
    }
    const auto expected = compute_checksum(bytes.subspan(1, HeaderSize - 1 + h.payload_len), info->crc_extra);
    const auto actual = static_cast<std::uint16_t>(bytes[crc_end - 2] | (bytes[crc_end - 1] << 8));
    if (expected != actual) {
        throw WireError(WireErrc::ChecksumMismatch, "checksum mismatch");
    }
    if (h.payload_len == 0) {
        throw WireError(WireErrc::MalformedFrame, "empty payload");
    }

    std::optional<Signature> sig;
    if (h.is_signed()) {
        Signature s;
        s.link_id = bytes[crc_end];
        for (int i = 0; i < 6; ++i) {
            s.timestamp |= static_cast<std::uint64_t>(bytes[crc_end + 1 + i]) << (8 * i);
        }
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(crc_end + 7), 6, s.sig.begin());
        sig = s;
    }
    auto msg = parse_payload(h.msg_id, bytes.subspan(HeaderSize, h.payload_len));
    return DecodedFrame{h, std::move(msg), sig, false};
}

/**
 * Full receive path. With a keystore, signed frames must verify against the key for
 * their link and carry a fresh timestamp before the message is returned; unsigned
 * frames are refused when the keystore requires signing. The replay state is only
 * advanced for frames that pass every check.
 */
[[nodiscard]] inline DecodedFrame decode_frame(std::span<const std::uint8_t> bytes, Keystore* keystore = nullptr)
{
    auto frame = parse_frame(bytes);
    if (keystore == nullptr) {
        return frame;
    }
    if (!frame.signature) {
        if (keystore->require_signed()) {
            throw WireError(WireErrc::SignatureMissing, "unsigned frame refused");
        }
        return frame;
    }
    const auto& s = *frame.signature;
    const SecretKey* key = keystore->key_for(s.link_id);
    if (key == nullptr) {
        throw WireError(WireErrc::SignatureInvalid, "no key for link " + std::to_string(s.link_id));
    }
    const std::size_t crc_end = HeaderSize + frame.header.payload_len + ChecksumSize;
    const auto expected = detail::compute_signature(*key, bytes.first(crc_end), s.link_id, s.timestamp);
    if (expected != s.sig) {
        throw WireError(WireErrc::SignatureInvalid, "signature mismatch");
    }
    keystore->check_fresh(s.link_id, frame.header.sys_id, frame.header.comp_id, s.timestamp);
    keystore->accept(s.link_id, frame.header.sys_id, frame.header.comp_id, s.timestamp);
    frame.signature_verified = true;
    return frame;
}

}  // namespace autoserve::wire
