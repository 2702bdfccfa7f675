#pragma once

#include "homeauth/bits.hpp"
#include "homeauth/types.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace homeauth {

inline constexpr std::size_t kDigestBits = 256;
inline constexpr std::size_t kKeyBits = 256;
inline constexpr std::size_t kCounterBits = 256;
inline constexpr std::size_t kCipherBlockBits = 128;
inline constexpr std::size_t kSeedBits = 16;
inline constexpr std::size_t kNonceBits = 16;

using Bytes32 = std::array<std::uint8_t, 32>;

/// SHA-256 output. Holds MIDs, MACs, PoB and PoC values.
struct Digest256 {
    Bytes32 bytes{};

    static Digest256 from_bits(const BitString& bits);
    static Digest256 from_hex(std::string_view hex);
    BitString bits() const { return BitString::from_bytes(bytes); }
    std::string hex() const;

    friend auto operator<=>(const Digest256&, const Digest256&) = default;
};

/// 256-bit AES key (session key or D2D key).
struct SymKey {
    Bytes32 bytes{};

    static SymKey from_bits(const BitString& bits);
    static SymKey from_hex(std::string_view hex);
    BitString bits() const { return BitString::from_bytes(bytes); }
    std::string hex() const;

    friend auto operator<=>(const SymKey&, const SymKey&) = default;
};

/// 256-bit unsigned counter (session or D2D), big-endian, arithmetic mod 2^256.
class Counter256 {
public:
    Counter256() = default;

    static Counter256 from_u64(std::uint64_t v);
    static Counter256 from_bytes(const Bytes32& be);
    static Counter256 from_bits(const BitString& bits);
    static Counter256 from_hex(std::string_view hex);

    const Bytes32& bytes() const { return be_; }
    BitString bits() const { return BitString::from_bytes(be_); }
    std::string hex() const;

    Counter256& operator++();
    Counter256 operator+(std::uint64_t delta) const;
    Counter256 operator-(std::uint64_t delta) const;

    /// (*this - base) mod 2^256, if that fits in 64 bits.
    std::optional<std::uint64_t> distance_from(const Counter256& base) const;

    friend auto operator<=>(const Counter256&, const Counter256&) = default;

private:
    Bytes32 be_{};
};

struct SecretSeed {
    std::uint16_t value = 0;
    friend auto operator<=>(const SecretSeed&, const SecretSeed&) = default;
};

/// 16-bit session nonce; the same width also carries the OTP.
struct Nonce16 {
    std::uint16_t value = 0;
    friend auto operator<=>(const Nonce16&, const Nonce16&) = default;
};

struct OpCounters {
    std::uint64_t hashes = 0;
    std::uint64_t encryptions = 0;
    std::uint64_t decryptions = 0;

    OpCounters& operator+=(const OpCounters& o)
    {
        hashes += o.hashes;
        encryptions += o.encryptions;
        decryptions += o.decryptions;
        return *this;
    }
    friend OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }
    friend OpCounters operator-(const OpCounters& a, const OpCounters& b)
    {
        return {a.hashes - b.hashes, a.encryptions - b.encryptions, a.decryptions - b.decryptions};
    }
    friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

struct SessionMaterial {
    Counter256 counter;
    SymKey key;
};

/// ceil(clear_bits / 128) * 128.
constexpr std::size_t cipher_bits_for(std::size_t clear_bits)
{
    return (clear_bits + kCipherBlockBits - 1) / kCipherBlockBits * kCipherBlockBits;
}

/// Final `length` bits of a digest. Pure; not instrumented.
BitString tail_bits(const Digest256& d, std::size_t length);

/// Instrumented primitive set owned by one protocol engine (node).
///
/// Every hash, MAC, encryption and decryption bumps ops(); the seeded
/// generator makes all randomness reproducible. Copying a suite copies its
/// generator state and counters.
class CryptoSuite {
public:
    explicit CryptoSuite(std::uint64_t seed = 0);

    Digest256 hash(const BitString& data);
    Digest256 hash(std::span<const std::uint8_t> data);

    /// HMAC-SHA-256 keyed by the 256-bit big-endian counter value.
    Digest256 keyed_mac(const Counter256& key, std::span<const std::uint8_t> message);

    /// AES-256, fixed-IV CBC over the zero-padded clear bits.
    BitString encrypt(const SymKey& key, const BitString& clear);
    BitString decrypt(const SymKey& key, const BitString& cipher, std::size_t clear_len);

    /// (hash(seed||nonce||"CTR"), hash(seed||nonce||"KEY")).
    SessionMaterial derive_session(SecretSeed seed, Nonce16 nonce);

    /// hash(counter || id), counter first, both big-endian.
    Digest256 masked_identity(const Counter256& cc, DeviceId id);

    BitString random_bits(std::size_t n);
    std::uint16_t random_u16();
    Counter256 random_counter();
    SymKey random_key();

    const OpCounters& ops() const { return ops_; }

    /// Generator state as text, for snapshots.
    std::string rng_state() const;
    void set_rng_state(const std::string& state);
    void set_ops(const OpCounters& ops) { ops_ = ops; }

private:
    std::mt19937_64 rng_;
    OpCounters ops_;
};

} // namespace homeauth

template <>
struct std::hash<homeauth::Digest256> {
    std::size_t operator()(const homeauth::Digest256& d) const noexcept
    {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
            h = (h << 8) | d.bytes[i];
        }
        return h;
    }
};
