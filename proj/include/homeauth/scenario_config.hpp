#pragma once

#include "homeauth/sim.hpp"

#include <stdexcept>
#include <string>

namespace homeauth::sim {

/// Invalid scenario file. line is 1-based (0 when unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string field, const std::string& message);

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// Parses and validates a YAML scenario. Every reference is checked before
/// anything runs.
Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario_file(const std::string& path);

} // namespace homeauth::sim
