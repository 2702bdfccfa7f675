#pragma once

#include "homeauth/crypto.hpp"
#include "homeauth/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace homeauth {

/// One shared counter (session or D2D) as held by one endpoint.
///
/// `next` is the counter the endpoint sends with; every send and every
/// validated receipt advances it. `floor` is one past the last counter
/// accepted inbound, so any frame at or below a previously accepted counter
/// can never match again. Inbound masked identities are precomputed for
/// counters in [max(floor, next - W), next + W], which lets a receiver
/// re-synchronise after up to W lost frames without any lookup-time hashing.
class CounterChannel {
public:
    struct WindowEntry {
        Counter256 counter;
        Digest256 mid;
    };

    CounterChannel(Counter256 start, DeviceId inbound_identity, std::uint32_t window, CryptoSuite& crypto);

    /// Restores a channel mid-stream (snapshots).
    CounterChannel(Counter256 start, Counter256 next, Counter256 floor, DeviceId inbound_identity,
                   std::uint32_t window, CryptoSuite& crypto);

    const Counter256& start() const { return start_; }
    const Counter256& next() const { return next_; }
    const Counter256& floor() const { return floor_; }
    DeviceId inbound_identity() const { return inbound_; }
    std::uint32_t window_size() const { return window_size_; }

    /// Counters consumed since start (next - start).
    std::uint64_t advanced() const;

    /// Returns the counter to send with and advances.
    Counter256 take_send(CryptoSuite& crypto);

    /// Marks `c` as validated inbound.
    void accept(const Counter256& c, CryptoSuite& crypto);

    std::optional<Counter256> match(const Digest256& mid) const;

    const std::vector<WindowEntry>& window() const { return window_; }

private:
    void refresh(CryptoSuite& crypto);

    Counter256 start_;
    Counter256 next_;
    Counter256 floor_;
    DeviceId inbound_;
    std::uint32_t window_size_;
    std::vector<WindowEntry> window_;
};

} // namespace homeauth
