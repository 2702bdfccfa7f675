#include "homeauth/protocol.hpp"

#include <array>

namespace homeauth {

std::string_view verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Accepted: return "accepted";
    case Verdict::Discarded: return "discarded";
    case Verdict::ParseError: return "parse-error";
    }
    return "?";
}

std::string_view reason_name(DiscardReason r)
{
    switch (r) {
    case DiscardReason::None: return "";
    case DiscardReason::Parse: return "parse";
    case DiscardReason::UnknownMid: return "unknown-mid";
    case DiscardReason::UnexpectedKind: return "unexpected-kind";
    case DiscardReason::MacMismatch: return "mac-mismatch";
    case DiscardReason::ProofMismatch: return "proof-mismatch";
    case DiscardReason::NotAuthenticated: return "not-authenticated";
    case DiscardReason::NoPending: return "no-pending";
    case DiscardReason::BadPayload: return "bad-payload";
    }
    return "?";
}

namespace detail {

Outgoing seal(CryptoSuite& crypto, DeviceId to, wire::MessageKind kind, const Digest256& receiver_mid,
              const std::optional<Digest256>& proof, const SymKey* key, const std::optional<BitString>& clear,
              const Counter256& mac_key)
{
    wire::ProtocolMessage m;
    m.kind = kind;
    m.receiver_mid = receiver_mid;
    m.proof = proof;
    if (clear) {
        m.cipher = crypto.encrypt(*key, *clear);
        m.clear_len = static_cast<std::uint16_t>(clear->size());
    }
    const auto input = wire::mac_input(m);
    m.mac = crypto.keyed_mac(mac_key, input);
    return Outgoing{to, kind, wire::encode(m), clear};
}

bool verify_mac(CryptoSuite& crypto, const wire::ProtocolMessage& m, const Counter256& mac_key)
{
    const auto input = wire::mac_input(m);
    return crypto.keyed_mac(mac_key, input) == m.mac;
}

Digest256 proof_of_belonging(CryptoSuite& crypto, const Counter256& cc, Nonce16 otp)
{
    std::array<std::uint8_t, 34> buf{};
    std::copy(cc.bytes().begin(), cc.bytes().end(), buf.begin());
    buf[32] = static_cast<std::uint8_t>(otp.value >> 8);
    buf[33] = static_cast<std::uint8_t>(otp.value);
    return crypto.hash(std::span<const std::uint8_t>(buf));
}

Digest256 proof_of_controller(CryptoSuite& crypto, const Counter256& counter, const SymKey& key, SecretSeed seed)
{
    std::array<std::uint8_t, 66> buf{};
    std::copy(counter.bytes().begin(), counter.bytes().end(), buf.begin());
    std::copy(key.bytes.begin(), key.bytes.end(), buf.begin() + 32);
    buf[64] = static_cast<std::uint8_t>(seed.value >> 8);
    buf[65] = static_cast<std::uint8_t>(seed.value);
    return crypto.hash(std::span<const std::uint8_t>(buf));
}

BitString identity_mask(CryptoSuite& crypto, const Counter256& cc)
{
    return tail_bits(crypto.hash(std::span<const std::uint8_t>(cc.bytes())), kIdentityBits);
}

BitString update_clear(UpdateOp op, DeviceId subject)
{
    BitString clear;
    clear.append_uint(static_cast<std::uint8_t>(op), 8);
    clear.append_uint(subject.value, kIdentityBits);
    return clear;
}

} // namespace detail

} // namespace homeauth
