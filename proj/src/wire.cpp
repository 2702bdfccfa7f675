#include "homeauth/wire.hpp"

#include <array>

namespace homeauth::wire {

namespace {

constexpr std::array<std::string_view, 9> kNames{"?", "A1", "A2", "C1", "C2", "C3", "C4", "DATA", "UPDATE"};

std::size_t cipher_len_for(MessageKind kind, std::size_t clear_len)
{
    return carries_cipher(kind) ? cipher_bits_for(clear_len) : 0;
}

} // namespace

std::string_view kind_name(MessageKind kind)
{
    const auto i = static_cast<std::size_t>(kind);
    return i < kNames.size() ? kNames[i] : "?";
}

std::optional<MessageKind> kind_from_name(std::string_view name)
{
    if (name == "C5") {
        return MessageKind::Data;
    }
    for (std::size_t i = 1; i < kNames.size(); ++i) {
        if (kNames[i] == name) {
            return static_cast<MessageKind>(i);
        }
    }
    return std::nullopt;
}

std::optional<MessageKind> kind_from_tag(std::uint64_t tag)
{
    if (tag < 1 || tag > static_cast<std::uint64_t>(MessageKind::Update)) {
        return std::nullopt;
    }
    return static_cast<MessageKind>(tag);
}

bool carries_proof(MessageKind kind)
{
    return kind == MessageKind::C1 || kind == MessageKind::C2 || kind == MessageKind::C3;
}

bool carries_cipher(MessageKind kind)
{
    return kind != MessageKind::C3;
}

BitString encode(const ProtocolMessage& m)
{
    if (!kind_from_tag(static_cast<std::uint64_t>(m.kind))) {
        throw WireError("encode: unknown message kind");
    }
    if (carries_proof(m.kind) != m.proof.has_value()) {
        throw WireError(std::string("encode: proof field presence invalid for ") + std::string(kind_name(m.kind)));
    }
    if (carries_cipher(m.kind)) {
        if (m.clear_len == 0) {
            throw WireError("encode: clear_len must be positive when a cipher is carried");
        }
        if (m.cipher.size() != cipher_bits_for(m.clear_len)) {
            throw WireError("encode: cipher length violates the block length law");
        }
    } else if (!m.cipher.empty() || m.clear_len != 0) {
        throw WireError("encode: C3 carries no cipher");
    }

    BitString out;
    out.append_uint(static_cast<std::uint64_t>(m.kind), kKindBits);
    out.append_uint(m.clear_len, kClearLenBits);
    out.append(m.receiver_mid.bits());
    if (m.proof) {
        out.append(m.proof->bits());
    }
    out.append(m.cipher);
    out.append(m.mac.bits());
    return out;
}

DecodeResult decode(const BitString& bits)
{
    DecodeResult r;
    if (bits.size() < kHeaderBits + 2 * kDigestBits) {
        r.error = {ParseErrorCode::Truncated, "frame shorter than header + MID + MAC"};
        return r;
    }
    const auto kind = kind_from_tag(bits.read_uint(0, kKindBits));
    if (!kind) {
        r.error = {ParseErrorCode::BadKind, "unknown kind tag"};
        return r;
    }
    const auto clear_len = static_cast<std::uint16_t>(bits.read_uint(kKindBits, kClearLenBits));
    if (carries_cipher(*kind) ? clear_len == 0 : clear_len != 0) {
        r.error = {ParseErrorCode::BadClearLength, "clear_len inconsistent with kind"};
        return r;
    }
    const std::size_t expected = kHeaderBits + payload_bits(*kind, clear_len);
    if (bits.size() != expected) {
        r.error = {ParseErrorCode::LengthMismatch,
                   "frame is " + std::to_string(bits.size()) + " bits, expected " + std::to_string(expected)};
        return r;
    }

    ProtocolMessage m;
    m.kind = *kind;
    m.clear_len = clear_len;
    std::size_t pos = kHeaderBits;
    m.receiver_mid = Digest256::from_bits(bits.slice(pos, kDigestBits));
    pos += kDigestBits;
    if (carries_proof(*kind)) {
        m.proof = Digest256::from_bits(bits.slice(pos, kDigestBits));
        pos += kDigestBits;
    }
    const auto clen = cipher_len_for(*kind, clear_len);
    m.cipher = bits.slice(pos, clen);
    pos += clen;
    m.mac = Digest256::from_bits(bits.slice(pos, kDigestBits));
    r.message = std::move(m);
    return r;
}

std::size_t payload_bits(MessageKind kind, std::size_t clear_len)
{
    return kDigestBits + (carries_proof(kind) ? kDigestBits : 0) + cipher_len_for(kind, clear_len) + kDigestBits;
}

std::vector<std::uint8_t> mac_input(MessageKind kind, const Digest256& receiver_mid,
                                    const std::optional<Digest256>& proof, const BitString& cipher,
                                    std::uint16_t clear_len)
{
    std::vector<std::uint8_t> out(receiver_mid.bytes.begin(), receiver_mid.bytes.end());
    if (proof) {
        out.insert(out.end(), proof->bytes.begin(), proof->bytes.end());
    }
    out.insert(out.end(), cipher.bytes().begin(), cipher.bytes().end());
    out.push_back(static_cast<std::uint8_t>(kind));
    out.push_back(static_cast<std::uint8_t>(clear_len >> 8));
    out.push_back(static_cast<std::uint8_t>(clear_len));
    return out;
}

std::string_view field_name(Field f)
{
    switch (f) {
    case Field::Kind: return "kind";
    case Field::ClearLen: return "clear_len";
    case Field::ReceiverMid: return "receiver_mid";
    case Field::Proof: return "proof";
    case Field::Cipher: return "cipher";
    case Field::Mac: return "mac";
    }
    return "?";
}

std::vector<FieldSpan> field_layout(MessageKind kind, std::size_t clear_len)
{
    std::vector<FieldSpan> spans;
    std::size_t pos = 0;
    auto push = [&](Field f, std::size_t len) {
        spans.push_back({f, pos, len});
        pos += len;
    };
    push(Field::Kind, kKindBits);
    push(Field::ClearLen, kClearLenBits);
    push(Field::ReceiverMid, kDigestBits);
    if (carries_proof(kind)) {
        push(Field::Proof, kDigestBits);
    }
    if (const auto clen = cipher_len_for(kind, clear_len); clen > 0) {
        push(Field::Cipher, clen);
    }
    push(Field::Mac, kDigestBits);
    return spans;
}

} // namespace homeauth::wire
