#include "homeauth/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>
#include <sstream>
#include <stdexcept>

namespace homeauth {

namespace {

std::string hex_of(const Bytes32& b)
{
    return BitString::from_bytes(b).to_hex();
}

Bytes32 bytes_from_bits(const BitString& bits, const char* what)
{
    if (bits.size() != 256) {
        throw std::invalid_argument(std::string(what) + ": expected 256 bits");
    }
    Bytes32 out{};
    std::copy(bits.bytes().begin(), bits.bytes().end(), out.begin());
    return out;
}

Bytes32 bytes_from_hex(std::string_view hex, const char* what)
{
    if (hex.size() != 64) {
        throw std::invalid_argument(std::string(what) + ": expected 64 hex digits");
    }
    return bytes_from_bits(BitString::from_hex(hex, 256), what);
}

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

std::vector<std::uint8_t> aes_cbc(const SymKey& key, std::span<const std::uint8_t> in, bool encrypt)
{
    static constexpr std::array<std::uint8_t, 16> iv{};
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) {
        throw std::runtime_error("EVP_CIPHER_CTX_new failed");
    }
    if (EVP_CipherInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr, key.bytes.data(), iv.data(), encrypt ? 1 : 0) != 1) {
        throw std::runtime_error("EVP_CipherInit_ex failed");
    }
    EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    std::vector<std::uint8_t> out(in.size() + 16);
    int len = 0;
    int total = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(in.size())) != 1) {
        throw std::runtime_error("EVP_CipherUpdate failed");
    }
    total = len;
    if (EVP_CipherFinal_ex(ctx.get(), out.data() + total, &len) != 1) {
        throw std::runtime_error("EVP_CipherFinal_ex failed");
    }
    total += len;
    out.resize(static_cast<std::size_t>(total));
    return out;
}

} // namespace

Digest256 Digest256::from_bits(const BitString& bits)
{
    return {bytes_from_bits(bits, "Digest256")};
}

Digest256 Digest256::from_hex(std::string_view hex)
{
    return {bytes_from_hex(hex, "Digest256")};
}

std::string Digest256::hex() const
{
    return hex_of(bytes);
}

SymKey SymKey::from_bits(const BitString& bits)
{
    return {bytes_from_bits(bits, "SymKey")};
}

SymKey SymKey::from_hex(std::string_view hex)
{
    return {bytes_from_hex(hex, "SymKey")};
}

std::string SymKey::hex() const
{
    return hex_of(bytes);
}

Counter256 Counter256::from_u64(std::uint64_t v)
{
    Counter256 c;
    for (std::size_t i = 0; i < 8; ++i) {
        c.be_[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    return c;
}

Counter256 Counter256::from_bytes(const Bytes32& be)
{
    Counter256 c;
    c.be_ = be;
    return c;
}

Counter256 Counter256::from_bits(const BitString& bits)
{
    return from_bytes(bytes_from_bits(bits, "Counter256"));
}

Counter256 Counter256::from_hex(std::string_view hex)
{
    return from_bytes(bytes_from_hex(hex, "Counter256"));
}

std::string Counter256::hex() const
{
    return hex_of(be_);
}

Counter256& Counter256::operator++()
{
    for (std::size_t i = 32; i-- > 0;) {
        if (++be_[i] != 0) {
            break;
        }
    }
    return *this;
}

Counter256 Counter256::operator+(std::uint64_t delta) const
{
    Counter256 out = *this;
    unsigned carry = 0;
    for (std::size_t i = 0; i < 32; ++i) {
        const std::size_t pos = 31 - i;
        const unsigned add = i < 8 ? static_cast<unsigned>((delta >> (8 * i)) & 0xFF) : 0U;
        const unsigned sum = out.be_[pos] + add + carry;
        out.be_[pos] = static_cast<std::uint8_t>(sum);
        carry = sum >> 8;
    }
    return out;
}

Counter256 Counter256::operator-(std::uint64_t delta) const
{
    Counter256 out = *this;
    int borrow = 0;
    for (std::size_t i = 0; i < 32; ++i) {
        const std::size_t pos = 31 - i;
        const int sub = i < 8 ? static_cast<int>((delta >> (8 * i)) & 0xFF) : 0;
        int diff = out.be_[pos] - sub - borrow;
        borrow = diff < 0 ? 1 : 0;
        if (diff < 0) diff += 256;
        out.be_[pos] = static_cast<std::uint8_t>(diff);
    }
    return out;
}

std::optional<std::uint64_t> Counter256::distance_from(const Counter256& base) const
{
    Bytes32 diff{};
    int borrow = 0;
    for (std::size_t i = 32; i-- > 0;) {
        int d = be_[i] - base.be_[i] - borrow;
        borrow = d < 0 ? 1 : 0;
        if (d < 0) d += 256;
        diff[i] = static_cast<std::uint8_t>(d);
    }
    for (std::size_t i = 0; i < 24; ++i) {
        if (diff[i] != 0) {
            return std::nullopt;
        }
    }
    std::uint64_t v = 0;
    for (std::size_t i = 24; i < 32; ++i) {
        v = (v << 8) | diff[i];
    }
    return v;
}

BitString tail_bits(const Digest256& d, std::size_t length)
{
    if (length < 1 || length > kDigestBits) {
        throw std::invalid_argument("tail_bits: length must be in [1, 256]");
    }
    return d.bits().slice(kDigestBits - length, length);
}

CryptoSuite::CryptoSuite(std::uint64_t seed) : rng_(seed) {}

Digest256 CryptoSuite::hash(const BitString& data)
{
    if (!data.byte_aligned()) {
        throw std::invalid_argument("hash: input must be a whole number of bytes");
    }
    return hash(std::span<const std::uint8_t>(data.bytes()));
}

Digest256 CryptoSuite::hash(std::span<const std::uint8_t> data)
{
    Digest256 out;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
        throw std::runtime_error("EVP_Digest failed");
    }
    ++ops_.hashes;
    return out;
}

Digest256 CryptoSuite::keyed_mac(const Counter256& key, std::span<const std::uint8_t> message)
{
    Digest256 out;
    unsigned int len = 0;
    const auto& k = key.bytes();
    if (HMAC(EVP_sha256(), k.data(), static_cast<int>(k.size()), message.data(), message.size(), out.bytes.data(),
             &len) == nullptr
        || len != 32) {
        throw std::runtime_error("HMAC failed");
    }
    ++ops_.hashes;
    return out;
}

BitString CryptoSuite::encrypt(const SymKey& key, const BitString& clear)
{
    if (clear.empty()) {
        throw std::invalid_argument("encrypt: clear text must be at least one bit");
    }
    std::vector<std::uint8_t> block_aligned(cipher_bits_for(clear.size()) / 8, 0);
    std::copy(clear.bytes().begin(), clear.bytes().end(), block_aligned.begin());
    auto out = aes_cbc(key, block_aligned, true);
    ++ops_.encryptions;
    return BitString::from_bytes(out);
}

BitString CryptoSuite::decrypt(const SymKey& key, const BitString& cipher, std::size_t clear_len)
{
    if (cipher.empty() || cipher.size() % kCipherBlockBits != 0) {
        throw std::invalid_argument("decrypt: cipher length must be a positive multiple of 128 bits");
    }
    if (clear_len > cipher.size()) {
        throw std::invalid_argument("decrypt: clear_len exceeds cipher length");
    }
    auto out = aes_cbc(key, cipher.bytes(), false);
    ++ops_.decryptions;
    return BitString::from_bytes(out, clear_len);
}

SessionMaterial CryptoSuite::derive_session(SecretSeed seed, Nonce16 nonce)
{
    auto input = [&](std::string_view label) {
        std::vector<std::uint8_t> buf{static_cast<std::uint8_t>(seed.value >> 8), static_cast<std::uint8_t>(seed.value),
                                      static_cast<std::uint8_t>(nonce.value >> 8), static_cast<std::uint8_t>(nonce.value)};
        buf.insert(buf.end(), label.begin(), label.end());
        return buf;
    };
    const auto ctr = hash(input("CTR"));
    const auto key = hash(input("KEY"));
    return {Counter256::from_bytes(ctr.bytes), SymKey{key.bytes}};
}

Digest256 CryptoSuite::masked_identity(const Counter256& cc, DeviceId id)
{
    std::array<std::uint8_t, 34> buf{};
    std::copy(cc.bytes().begin(), cc.bytes().end(), buf.begin());
    buf[32] = static_cast<std::uint8_t>(id.value >> 8);
    buf[33] = static_cast<std::uint8_t>(id.value);
    return hash(std::span<const std::uint8_t>(buf));
}

BitString CryptoSuite::random_bits(std::size_t n)
{
    BitString out;
    while (out.size() < n) {
        const auto word = rng_();
        const std::size_t take = std::min<std::size_t>(64, n - out.size());
        out.append_uint(word >> (64 - take), take);
    }
    return out;
}

std::uint16_t CryptoSuite::random_u16()
{
    return static_cast<std::uint16_t>(rng_() >> 48);
}

Counter256 CryptoSuite::random_counter()
{
    return Counter256::from_bits(random_bits(kCounterBits));
}

SymKey CryptoSuite::random_key()
{
    return SymKey::from_bits(random_bits(kKeyBits));
}

std::string CryptoSuite::rng_state() const
{
    std::ostringstream os;
    os << rng_;
    return os.str();
}

void CryptoSuite::set_rng_state(const std::string& state)
{
    std::istringstream is(state);
    is >> rng_;
    if (!is) {
        throw std::invalid_argument("CryptoSuite: malformed generator state");
    }
}

} // namespace homeauth
