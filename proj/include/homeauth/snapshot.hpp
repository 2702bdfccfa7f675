#pragma once

#include "homeauth/controller.hpp"
#include "homeauth/device.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace homeauth {

/// Serialized protocol state of every node in a run.
struct Snapshot {
    std::uint32_t resync_window = 4;
    Tick dormancy_threshold = 300;
    Tick response_timeout = 10;
    Controller::State controller;
    std::map<std::string, Device::State> devices;
};

Snapshot take_snapshot(const Controller& controller, const std::map<std::string, Device>& devices);

nlohmann::json snapshot_to_json(const Snapshot& s);
/// Throws std::runtime_error (nlohmann::json::exception) on malformed input.
Snapshot snapshot_from_json(const nlohmann::json& j);

struct RestoredNodes {
    Controller controller;
    std::map<std::string, Device> devices;
};

RestoredNodes restore(const Snapshot& s);

} // namespace homeauth
