#include "homeauth/protocol.hpp"
#include "homeauth/wire.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace homeauth;
using wire::MessageKind;

namespace {

const MessageKind kAllKinds[] = {MessageKind::A1, MessageKind::A2, MessageKind::C1,   MessageKind::C2,
                                 MessageKind::C3, MessageKind::C4, MessageKind::Data, MessageKind::Update};

Digest256 random_digest(CryptoSuite& c)
{
    return Digest256::from_bits(c.random_bits(256));
}

wire::ProtocolMessage random_message(CryptoSuite& c, MessageKind kind, std::uint16_t clear_len)
{
    wire::ProtocolMessage m;
    m.kind = kind;
    m.receiver_mid = random_digest(c);
    if (wire::carries_proof(kind)) {
        m.proof = random_digest(c);
    }
    if (wire::carries_cipher(kind)) {
        m.clear_len = clear_len;
        m.cipher = c.random_bits(cipher_bits_for(clear_len));
    }
    m.mac = random_digest(c);
    return m;
}

} // namespace

TEST_CASE("per-step field sums for a 128-bit payload")
{
    CHECK(wire::payload_bits(MessageKind::A1, kA1ClearBits) == 640);
    CHECK(wire::payload_bits(MessageKind::A2, kA2ClearBits) == 640);
    CHECK(wire::payload_bits(MessageKind::C1, kC1ClearBits) == 896);
    CHECK(wire::payload_bits(MessageKind::C2, kC2ClearBits) == 1408);
    CHECK(wire::payload_bits(MessageKind::C3, 0) == 768);
    CHECK(wire::payload_bits(MessageKind::C4, kC4ClearBits) == 1024);
    CHECK(wire::payload_bits(MessageKind::Data, 128) == 640);
    CHECK(wire::payload_bits(MessageKind::Update, kUpdateClearBits) == 640);
}

TEST_CASE("clear lengths of fixed formats")
{
    CHECK(kA1ClearBits == 18);
    CHECK(kA2ClearBits == 16);
    CHECK(kC1ClearBits == 16);
    CHECK(kC2ClearBits == 528);
    CHECK(kC4ClearBits == 512);
}

TEST_CASE("encode then decode is identity for every kind")
{
    CryptoSuite c(5);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 400; ++trial) {
        const auto kind = kAllKinds[trial % 8];
        const auto clear_len = static_cast<std::uint16_t>(rng() % 1200 + 1);
        const auto m = random_message(c, kind, clear_len);
        const auto bits = wire::encode(m);
        REQUIRE(bits.size() == wire::kHeaderBits + wire::payload_bits(kind, m.clear_len));
        const auto d = wire::decode(bits);
        REQUIRE(d);
        REQUIRE(*d.message == m);
        REQUIRE(wire::encode(*d.message) == bits);
    }
}

TEST_CASE("field layout tiles the frame")
{
    for (const auto kind : kAllKinds) {
        const std::size_t clear_len = wire::carries_cipher(kind) ? 130 : 0;
        const auto spans = wire::field_layout(kind, clear_len);
        std::size_t offset = 0;
        for (const auto& s : spans) {
            CHECK(s.offset == offset);
            offset += s.length;
        }
        CHECK(offset == wire::kHeaderBits + wire::payload_bits(kind, clear_len));
    }
}

TEST_CASE("decode is total on arbitrary input")
{
    CryptoSuite c(8);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto bits = c.random_bits(rng() % 2000);
        const auto d = wire::decode(bits);
        if (d) {
            CHECK(wire::encode(*d.message) == bits);
        }
    }
}

TEST_CASE("decode rejects malformed frames")
{
    CryptoSuite c(9);
    const auto m = random_message(c, MessageKind::C2, kC2ClearBits);
    auto bits = wire::encode(m);

    CHECK(wire::decode(bits.slice(0, 10)).error.code == wire::ParseErrorCode::Truncated);

    auto bad_kind = bits;
    bad_kind.set_bit(0, true); // tag 0b1100 = 12
    CHECK(wire::decode(bad_kind).error.code == wire::ParseErrorCode::BadKind);

    auto longer = bits;
    longer.append_bit(false);
    CHECK(wire::decode(longer).error.code == wire::ParseErrorCode::LengthMismatch);

    const auto c3 = random_message(c, MessageKind::C3, 0);
    auto c3_bits = wire::encode(c3);
    c3_bits.set_bit(wire::kHeaderBits - 1, true);
    CHECK(wire::decode(c3_bits).error.code == wire::ParseErrorCode::BadClearLength);
}

TEST_CASE("encode refuses inconsistent field sets")
{
    CryptoSuite c(10);
    auto m = random_message(c, MessageKind::A1, kA1ClearBits);
    m.proof = random_digest(c);
    CHECK_THROWS_AS(wire::encode(m), wire::WireError);

    auto d = random_message(c, MessageKind::Data, 128);
    d.cipher = c.random_bits(64);
    CHECK_THROWS_AS(wire::encode(d), wire::WireError);
}

TEST_CASE("kind names round trip")
{
    for (const auto kind : kAllKinds) {
        CHECK(wire::kind_from_name(wire::kind_name(kind)) == kind);
        CHECK(wire::kind_from_tag(static_cast<std::uint64_t>(kind)) == kind);
    }
    CHECK_FALSE(wire::kind_from_tag(0).has_value());
    CHECK_FALSE(wire::kind_from_tag(9).has_value());
}
