#include "homeauth/channel.hpp"

#include <algorithm>
#include <limits>

namespace homeauth {

namespace {

// a >= b under serial-number arithmetic (differences below 2^63 count as forward).
bool serial_ge(const Counter256& a, const Counter256& b)
{
    const auto d = a.distance_from(b);
    return d && *d < (std::uint64_t{1} << 63);
}

} // namespace

CounterChannel::CounterChannel(Counter256 start, DeviceId inbound_identity, std::uint32_t window,
                               CryptoSuite& crypto)
    : CounterChannel(start, start, start, inbound_identity, window, crypto)
{
}

CounterChannel::CounterChannel(Counter256 start, Counter256 next, Counter256 floor, DeviceId inbound_identity,
                               std::uint32_t window, CryptoSuite& crypto)
    : start_(start), next_(next), floor_(floor), inbound_(inbound_identity), window_size_(window)
{
    refresh(crypto);
}

std::uint64_t CounterChannel::advanced() const
{
    return next_.distance_from(start_).value_or(std::numeric_limits<std::uint64_t>::max());
}

Counter256 CounterChannel::take_send(CryptoSuite& crypto)
{
    const Counter256 used = next_;
    ++next_;
    refresh(crypto);
    return used;
}

void CounterChannel::accept(const Counter256& c, CryptoSuite& crypto)
{
    floor_ = c + 1;
    if (serial_ge(floor_, next_)) {
        next_ = floor_;
    }
    refresh(crypto);
}

std::optional<Counter256> CounterChannel::match(const Digest256& mid) const
{
    for (const auto& e : window_) {
        if (e.mid == mid) {
            return e.counter;
        }
    }
    return std::nullopt;
}

void CounterChannel::refresh(CryptoSuite& crypto)
{
    const std::uint64_t behind = std::min<std::uint64_t>(window_size_, next_.distance_from(floor_).value_or(0));
    const Counter256 lo = next_ - behind;
    const std::uint64_t count = behind + window_size_ + 1;

    std::vector<WindowEntry> fresh;
    fresh.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const Counter256 c = lo + i;
        const auto it = std::find_if(window_.begin(), window_.end(), [&](const WindowEntry& e) { return e.counter == c; });
        if (it != window_.end()) {
            fresh.push_back(*it);
        } else {
            fresh.push_back({c, crypto.masked_identity(c, inbound_)});
        }
    }
    window_ = std::move(fresh);
}

} // namespace homeauth
