#include "homeauth/crypto.hpp"
#include "homeauth/protocol.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <string>

using namespace homeauth;

namespace {

std::span<const std::uint8_t> bytes_of(const std::string& s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

} // namespace

// Expected digests below were computed with Python hashlib / cryptography.

TEST_CASE("sha256 known answers")
{
    CryptoSuite c;
    CHECK(c.hash(bytes_of("")).hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(c.hash(bytes_of("abc")).hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(c.ops().hashes == 2);
}

TEST_CASE("hmac rfc4231 case 1 through a counter key")
{
    // HMAC zero-pads the key, so a 20-byte 0x0b key equals this 256-bit counter.
    CryptoSuite c;
    const auto key = Counter256::from_hex("0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b"
                                          "000000000000000000000000");
    CHECK(c.keyed_mac(key, bytes_of("Hi There")).hex() ==
          "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
}

TEST_CASE("aes-256 fixed-iv cbc known answer")
{
    CryptoSuite c;
    SymKey k;
    for (int i = 0; i < 32; ++i) {
        k.bytes[i] = static_cast<std::uint8_t>(i);
    }
    const auto pt = BitString::from_hex("00112233445566778899aabbccddeeff00112233445566778899aabbccddeeff", 256);
    const auto ct = c.encrypt(k, pt);
    CHECK(ct.to_hex() == "8ea2b7ca516745bfeafc49904b496089b6ac2f11b522ecb5d26ffc21280d647b");
    CHECK(c.decrypt(k, ct, 256) == pt);
    CHECK(c.ops().encryptions == 1);
    CHECK(c.ops().decryptions == 1);
}

TEST_CASE("short clear text is zero padded to whole blocks")
{
    CryptoSuite c(3);
    const auto k = c.random_key();
    const auto clear = BitString::from_uint(0x2ABCD, 18);
    const auto ct = c.encrypt(k, clear);
    CHECK(ct.size() == 128);
    CHECK(c.decrypt(k, ct, 18) == clear);
    CHECK(cipher_bits_for(528) == 640);
    CHECK(cipher_bits_for(512) == 512);
    CHECK(cipher_bits_for(1) == 128);
}

TEST_CASE("masked identity hashes counter then id")
{
    CryptoSuite c;
    CHECK(c.masked_identity(Counter256::from_u64(1), DeviceId{0x0101}).hex() ==
          "8b3cee550a34e55c569a87b27940298255ab90745430bda4d53d5eddc56c3329");
}

TEST_CASE("session derivation")
{
    CryptoSuite c;
    const auto s = c.derive_session(SecretSeed{0x1234}, Nonce16{0x5678});
    CHECK(s.counter.hex() == "f451f2a774a94d6c9a8912e7857e1614c89417c56613a44fa5f59f2a6ec0d9b5");
    CHECK(s.key.hex() == "c5a07fcb366ddfda06130c049902e4d0fc7b0a26e172a36a86c6602c1c19982d");
}

TEST_CASE("proofs and identity mask")
{
    CryptoSuite c;
    Bytes32 b{};
    for (int i = 0; i < 32; ++i) {
        b[i] = static_cast<std::uint8_t>(i);
    }
    const auto cc = Counter256::from_bytes(b);
    SymKey k;
    k.bytes.fill(0xAA);
    CHECK(detail::proof_of_belonging(c, cc, Nonce16{0xBEEF}).hex() ==
          "e0fa780b2f3eaab4a829cc8ef733581fff84080268f67de84f6e5b528e6bb999");
    CHECK(detail::proof_of_controller(c, cc, k, SecretSeed{0x1234}).hex() ==
          "3ad0f1540a0e5d046c02b766ae1ef7da1b684d4ea65579274d7a421e4557e1c6");
    CHECK(detail::identity_mask(c, cc) == BitString::from_uint(0x10dd, 16));
}

TEST_CASE("mac covers mid, cipher and header values")
{
    CryptoSuite c;
    Bytes32 b{};
    for (int i = 0; i < 32; ++i) {
        b[i] = static_cast<std::uint8_t>(i);
    }
    Digest256 mid;
    mid.bytes.fill(0x11);
    const auto cipher = BitString::from_hex(std::string(32, '2'), 128);
    const auto input = wire::mac_input(wire::MessageKind::A1, mid, std::nullopt, cipher, 18);
    CHECK(c.keyed_mac(Counter256::from_bytes(b), input).hex() ==
          "c969167d37ddee28d8c48062ff5846a44c679ff19407041365266e838a8140a3");
}

TEST_CASE("counter arithmetic wraps modulo 2^256")
{
    const auto max = Counter256::from_hex(std::string(64, 'f'));
    CHECK((max + 1) == Counter256{});
    CHECK((Counter256{} - 1) == max);
    CHECK((max + 5).distance_from(max) == 5u);
    auto c = Counter256::from_u64(0xFF);
    ++c;
    CHECK(c == Counter256::from_u64(0x100));
    CHECK_FALSE(Counter256::from_u64(0).distance_from(Counter256::from_u64(1)).has_value());
}

TEST_CASE("suites with the same seed draw the same values")
{
    CryptoSuite a(99);
    CryptoSuite b(99);
    CHECK(a.random_key() == b.random_key());
    CHECK(a.random_counter() == b.random_counter());
    CryptoSuite c(a.random_u16());
    c.set_rng_state(a.rng_state());
    CHECK(c.random_u16() == a.random_u16());
}
