#pragma once

// JSON documents exchanged with the command line tool.

#include <string>
#include <string_view>

#include "platoon/experiments.hpp"
#include "platoon/robustness.hpp"

namespace platoon {

/// {"n": ..., "k": ..., "refs": [...]}
std::string scenario_to_json(const PlatoonTopology& topology, const ReferenceSet& refs);
/// Throws ParameterError on malformed documents or invalid values.
Scenario scenario_from_json(std::string_view text);

std::string report_to_json(const RobustnessReport& report);
std::string report_summary(const RobustnessReport& report);

std::string scaling_to_json(const ScalingResult& result);
std::string checks_to_json(const std::vector<CheckResult>& checks);

}  // namespace platoon
