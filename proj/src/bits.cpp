#include "homeauth/bits.hpp"

#include <stdexcept>

namespace homeauth {

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

BitString::BitString(std::size_t nbits) : bytes_((nbits + 7) / 8, 0), nbits_(nbits) {}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes)
{
    return from_bytes(bytes, bytes.size() * 8);
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits)
{
    if (nbits > bytes.size() * 8) {
        throw std::invalid_argument("BitString::from_bytes: nbits exceeds input");
    }
    BitString out;
    out.nbits_ = nbits;
    out.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>((nbits + 7) / 8));
    if (nbits % 8 != 0) {
        out.bytes_.back() &= static_cast<std::uint8_t>(0xFF << (8 - nbits % 8));
    }
    return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t nbits)
{
    if (nbits > hex.size() * 4) {
        throw std::invalid_argument("BitString::from_hex: nbits exceeds hex length");
    }
    std::vector<std::uint8_t> raw((hex.size() + 1) / 2, 0);
    for (std::size_t i = 0; i < hex.size(); ++i) {
        const int v = hex_value(hex[i]);
        if (v < 0) {
            throw std::invalid_argument("BitString::from_hex: invalid hex digit");
        }
        raw[i / 2] |= static_cast<std::uint8_t>(i % 2 == 0 ? v << 4 : v);
    }
    return from_bytes(raw, nbits);
}

BitString BitString::from_uint(std::uint64_t value, std::size_t width)
{
    BitString out;
    out.append_uint(value, width);
    return out;
}

bool BitString::bit(std::size_t i) const
{
    if (i >= nbits_) {
        throw std::out_of_range("BitString::bit");
    }
    return (bytes_[i / 8] >> (7 - i % 8)) & 1U;
}

void BitString::set_bit(std::size_t i, bool value)
{
    if (i >= nbits_) {
        throw std::out_of_range("BitString::set_bit");
    }
    const auto mask = static_cast<std::uint8_t>(1U << (7 - i % 8));
    if (value) {
        bytes_[i / 8] |= mask;
    } else {
        bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
    }
}

void BitString::flip(std::size_t i)
{
    set_bit(i, !bit(i));
}

void BitString::append_bit(bool value)
{
    if (nbits_ % 8 == 0) {
        bytes_.push_back(0);
    }
    ++nbits_;
    set_bit(nbits_ - 1, value);
}

void BitString::append_uint(std::uint64_t value, std::size_t width)
{
    if (width > 64) {
        throw std::invalid_argument("BitString::append_uint: width > 64");
    }
    for (std::size_t i = width; i-- > 0;) {
        append_bit((value >> i) & 1U);
    }
}

void BitString::append(const BitString& other)
{
    if (byte_aligned()) {
        bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
        nbits_ += other.nbits_;
        return;
    }
    for (std::size_t i = 0; i < other.nbits_; ++i) {
        append_bit(other.bit(i));
    }
}

void BitString::append_bytes(std::span<const std::uint8_t> bytes)
{
    append(from_bytes(bytes));
}

BitString BitString::slice(std::size_t offset, std::size_t length) const
{
    if (offset > nbits_ || length > nbits_ - offset) {
        throw std::out_of_range("BitString::slice");
    }
    if (offset % 8 == 0) {
        return from_bytes(std::span(bytes_).subspan(offset / 8, (length + 7) / 8), length);
    }
    BitString out;
    out.bytes_.reserve((length + 7) / 8);
    for (std::size_t i = 0; i < length; ++i) {
        out.append_bit(bit(offset + i));
    }
    return out;
}

std::uint64_t BitString::read_uint(std::size_t offset, std::size_t width) const
{
    if (width > 64 || offset > nbits_ || width > nbits_ - offset) {
        throw std::out_of_range("BitString::read_uint");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
        v = (v << 1) | static_cast<std::uint64_t>(bit(offset + i));
    }
    return v;
}

std::string BitString::to_hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes_.size() * 2);
    for (const auto b : bytes_) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

BitString BitString::operator^(const BitString& other) const
{
    if (other.nbits_ != nbits_) {
        throw std::invalid_argument("BitString xor: length mismatch");
    }
    BitString out = *this;
    for (std::size_t i = 0; i < bytes_.size(); ++i) {
        out.bytes_[i] ^= other.bytes_[i];
    }
    return out;
}

} // namespace homeauth
