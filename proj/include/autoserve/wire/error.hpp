#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autoserve::wire {

enum class WireErrc
{
    PayloadTooLarge,
    BadMagic,
    TruncatedFrame,
    MalformedFrame,    // unknown incompat flags, trailing bytes, oversized or out-of-range payload
    ChecksumMismatch,
    UnknownMsgId,
    SignatureInvalid,
    SignatureMissing,
    StaleTimestamp,
};

[[nodiscard]] constexpr std::string_view to_string(WireErrc e)
{
    switch (e) {
    case WireErrc::PayloadTooLarge: return "PayloadTooLarge";
    case WireErrc::BadMagic: return "BadMagic";
    case WireErrc::TruncatedFrame: return "TruncatedFrame";
    case WireErrc::MalformedFrame: return "MalformedFrame";
    case WireErrc::ChecksumMismatch: return "ChecksumMismatch";
    case WireErrc::UnknownMsgId: return "UnknownMsgId";
    case WireErrc::SignatureInvalid: return "SignatureInvalid";
    case WireErrc::SignatureMissing: return "SignatureMissing";
    case WireErrc::StaleTimestamp: return "StaleTimestamp";
    }
    return "Unknown";
}

class WireError : public std::runtime_error
{
public:
    WireError(WireErrc code, std::string_view detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + std::string(detail))
        , code_(code)
    {
    }

    [[nodiscard]] WireErrc code() const noexcept { return code_; }

private:
    WireErrc code_;
};

}  // namespace autoserve::wire
