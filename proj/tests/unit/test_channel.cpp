#include "homeauth/channel.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace homeauth;

TEST_CASE("window covers counters around next")
{
    CryptoSuite c;
    const auto start = Counter256::from_u64(1000);
    CounterChannel ch(start, DeviceId{7}, 4, c);
    // floor == start, so the window is [start, start + 4].
    CHECK(ch.window().size() == 5);
    for (std::uint64_t k = 0; k <= 4; ++k) {
        CHECK(ch.match(c.masked_identity(start + k, DeviceId{7})) == start + k);
    }
    CHECK_FALSE(ch.match(c.masked_identity(start + 5, DeviceId{7})).has_value());
    CHECK_FALSE(ch.match(c.masked_identity(start, DeviceId{8})).has_value());
}

TEST_CASE("take_send advances and returns the old value")
{
    CryptoSuite c;
    CounterChannel ch(Counter256::from_u64(10), DeviceId{1}, 2, c);
    CHECK(ch.take_send(c) == Counter256::from_u64(10));
    CHECK(ch.take_send(c) == Counter256::from_u64(11));
    CHECK(ch.next() == Counter256::from_u64(12));
    CHECK(ch.advanced() == 2);
}

TEST_CASE("accept raises floor and resynchronises after losses")
{
    CryptoSuite c;
    const auto start = Counter256::from_u64(50);
    CounterChannel ch(start, DeviceId{3}, 4, c);
    ch.accept(start + 3, c); // frames 50..52 lost
    CHECK(ch.floor() == start + 4);
    CHECK(ch.next() == start + 4);
    for (std::uint64_t k = 0; k <= 3; ++k) {
        CHECK_FALSE(ch.match(c.masked_identity(start + k, DeviceId{3})).has_value());
    }
    CHECK(ch.match(c.masked_identity(start + 8, DeviceId{3})).has_value());
}

TEST_CASE("accepted counters never match again")
{
    CryptoSuite c;
    const auto start = Counter256::from_u64(0);
    CounterChannel ch(start, DeviceId{3}, 4, c);
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto mid = c.masked_identity(start + k, DeviceId{3});
        REQUIRE(ch.match(mid) == start + k);
        ch.accept(start + k, c);
        REQUIRE_FALSE(ch.match(mid).has_value());
    }
}

TEST_CASE("zero window matches only next")
{
    CryptoSuite c;
    const auto start = Counter256::from_u64(5);
    CounterChannel ch(start, DeviceId{3}, 0, c);
    CHECK(ch.window().size() == 1);
    CHECK(ch.match(c.masked_identity(start, DeviceId{3})).has_value());
    CHECK_FALSE(ch.match(c.masked_identity(start + 1, DeviceId{3})).has_value());
}
