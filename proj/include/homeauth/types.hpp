#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace homeauth {

/// 16-bit real identity of a device or the controller.
struct DeviceId {
    std::uint16_t value = 0;

    friend auto operator<=>(const DeviceId&, const DeviceId&) = default;
};

inline constexpr std::size_t kIdentityBits = 16;

/// Discrete simulation time.
using Tick = std::uint64_t;

} // namespace homeauth

template <>
struct std::hash<homeauth::DeviceId> {
    std::size_t operator()(const homeauth::DeviceId& id) const noexcept { return id.value; }
};
