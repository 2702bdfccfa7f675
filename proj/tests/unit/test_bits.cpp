#include "homeauth/bits.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using homeauth::BitString;

TEST_CASE("bitstring hex round trip keeps width")
{
    const auto b = BitString::from_hex("abcdef", 20);
    CHECK(b.size() == 20);
    CHECK(b.to_hex() == "abcde0");
    CHECK(b.read_uint(0, 20) == 0xabcde);
}

TEST_CASE("bitstring append and read at unaligned offsets")
{
    BitString b;
    b.append_uint(0x5, 3);
    b.append_uint(0xBEEF, 16);
    b.append_bit(true);
    CHECK(b.size() == 20);
    CHECK(b.read_uint(0, 3) == 0x5);
    CHECK(b.read_uint(3, 16) == 0xBEEF);
    CHECK(b.bit(19));
    CHECK(b.slice(3, 16) == BitString::from_uint(0xBEEF, 16));
}

TEST_CASE("bitstring slice and append are inverse")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = rng() % 300 + 1;
        BitString b;
        for (std::size_t i = 0; i < n; ++i) {
            b.append_bit(rng() & 1);
        }
        const std::size_t cut = rng() % (n + 1);
        BitString joined = b.slice(0, cut);
        joined.append(b.slice(cut, n - cut));
        REQUIRE(joined == b);
    }
}

TEST_CASE("bitstring trailing bits stay zero")
{
    BitString b = BitString::from_uint(0x7, 3);
    CHECK(b.bytes().size() == 1);
    CHECK(b.bytes()[0] == 0xE0);
    b.flip(0);
    CHECK(b.bytes()[0] == 0x60);
}

TEST_CASE("bitstring xor requires equal widths")
{
    const auto a = BitString::from_uint(0xF0F0, 16);
    const auto b = BitString::from_uint(0x0FF0, 16);
    CHECK((a ^ b) == BitString::from_uint(0xFF00, 16));
    CHECK_THROWS(a ^ BitString::from_uint(1, 8));
}
