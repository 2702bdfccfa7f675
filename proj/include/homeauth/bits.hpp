#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homeauth {

/// Variable-length bit string, packed MSB-first into bytes.
///
/// Bits past size() in the final byte are always zero, so two strings with
/// the same bits compare equal and byte-aligned strings can be fed directly
/// to byte-oriented primitives.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t nbits);

    static BitString from_bytes(std::span<const std::uint8_t> bytes);
    static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);
    /// Parses lowercase/uppercase hex; `nbits` may be shorter than 4*hex.size().
    static BitString from_hex(std::string_view hex, std::size_t nbits);
    static BitString from_uint(std::uint64_t value, std::size_t width);

    std::size_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }
    bool byte_aligned() const { return nbits_ % 8 == 0; }

    bool bit(std::size_t i) const;
    void set_bit(std::size_t i, bool value);
    void flip(std::size_t i);

    void append_bit(bool value);
    void append_uint(std::uint64_t value, std::size_t width);
    void append(const BitString& other);
    void append_bytes(std::span<const std::uint8_t> bytes);

    BitString slice(std::size_t offset, std::size_t length) const;
    std::uint64_t read_uint(std::size_t offset, std::size_t width) const;

    /// Packed storage; ceil(size()/8) bytes.
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    std::string to_hex() const;

    BitString operator^(const BitString& other) const;

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t nbits_ = 0;
};

} // namespace homeauth
