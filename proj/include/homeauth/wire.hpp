#pragma once

#include "homeauth/bits.hpp"
#include "homeauth/crypto.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace homeauth::wire {

// Frame layout (MSB-first):
//
//   kind:4 | clear_len:16 | receiver_mid:256 | [proof:256] | [cipher] | mac:256
//
// The 20 header bits are artifact framing and are excluded from
// payload_bits(). cipher length is always cipher_bits_for(clear_len).

enum class MessageKind : std::uint8_t {
    A1 = 1,
    A2 = 2,
    C1 = 3,
    C2 = 4,
    C3 = 5,
    C4 = 6,
    Data = 7, // C5 and every later D2D message
    Update = 8,
};

inline constexpr std::size_t kKindBits = 4;
inline constexpr std::size_t kClearLenBits = 16;
inline constexpr std::size_t kHeaderBits = kKindBits + kClearLenBits;
inline constexpr std::size_t kMaxClearBits = 0xFFFF;

std::string_view kind_name(MessageKind kind);
std::optional<MessageKind> kind_from_name(std::string_view name);
std::optional<MessageKind> kind_from_tag(std::uint64_t tag);

bool carries_proof(MessageKind kind);
bool carries_cipher(MessageKind kind);

struct ProtocolMessage {
    MessageKind kind = MessageKind::A1;
    Digest256 receiver_mid;
    std::optional<Digest256> proof;
    BitString cipher;
    std::uint16_t clear_len = 0;
    Digest256 mac;

    friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParseErrorCode {
    Truncated,
    BadKind,
    LengthMismatch,
    BadClearLength,
};

struct ParseError {
    ParseErrorCode code;
    std::string detail;
};

struct DecodeResult {
    std::optional<ProtocolMessage> message;
    ParseError error{ParseErrorCode::Truncated, {}};

    explicit operator bool() const { return message.has_value(); }
};

/// Throws WireError if the field combination is not valid for m.kind.
BitString encode(const ProtocolMessage& m);

/// Total: never throws on arbitrary input.
DecodeResult decode(const BitString& bits);

/// Field-sum size without the 20-bit header.
std::size_t payload_bits(MessageKind kind, std::size_t clear_len);

/// Bytes covered by the MAC: receiver_mid || proof || cipher || kind || clear_len.
/// The two header values are appended as a byte and a big-endian u16.
std::vector<std::uint8_t> mac_input(MessageKind kind, const Digest256& receiver_mid,
                                    const std::optional<Digest256>& proof, const BitString& cipher,
                                    std::uint16_t clear_len);
inline std::vector<std::uint8_t> mac_input(const ProtocolMessage& m)
{
    return mac_input(m.kind, m.receiver_mid, m.proof, m.cipher, m.clear_len);
}

enum class Field { Kind, ClearLen, ReceiverMid, Proof, Cipher, Mac };

std::string_view field_name(Field f);

struct FieldSpan {
    Field field;
    std::size_t offset;
    std::size_t length;
};

/// Bit spans of each field in the encoded form of m.
std::vector<FieldSpan> field_layout(MessageKind kind, std::size_t clear_len);

} // namespace homeauth::wire
