#pragma once

#include "homeauth/predicates.hpp"
#include "homeauth/sim.hpp"

#include <json.hpp>

#include <ostream>

namespace homeauth::report {

/// Sum of crypto ops over the controller and every device.
OpCounters total_ops(const sim::RunResult& result);

void write_text(std::ostream& os, const sim::Scenario& scenario, const sim::RunResult& result,
                const sim::ScenarioVerdict& verdict);

nlohmann::json to_json(const sim::Scenario& scenario, const sim::RunResult& result,
                       const sim::ScenarioVerdict& verdict);

} // namespace homeauth::report
